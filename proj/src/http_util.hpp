#pragma once
// Internal: URL splitting for cpp-httplib clients.

#include <optional>
#include <string>
#include <string_view>

namespace rethinker::detail {

struct UrlParts {
    std::string origin;  // scheme://host[:port]
    std::string path;    // begins with '/', may be just "/"
};

inline std::optional<UrlParts> split_url(std::string_view url)
{
    std::string_view scheme;
    if (url.starts_with("http://")) {
        scheme = "http://";
    } else if (url.starts_with("https://")) {
        scheme = "https://";
    } else {
        return std::nullopt;
    }
    auto rest = url.substr(scheme.size());
    auto slash = rest.find_first_of("/?#");
    auto host = rest.substr(0, slash);
    if (host.empty() || host.find_first_of(" \t\r\n") != std::string_view::npos || host.front() == ':') {
        return std::nullopt;
    }
    UrlParts parts;
    parts.origin = std::string(scheme) + std::string(host);
    parts.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
    if (parts.path.front() != '/') {
        parts.path.insert(parts.path.begin(), '/');
    }
    return parts;
}

} // namespace rethinker::detail
