#include "rethinker/text.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>

namespace rethinker {

TagScan scan_tag_regions(std::string_view text, std::string_view open, std::string_view close)
{
    TagScan scan;
    std::size_t pos = 0;
    while (true) {
        auto start = text.find(open, pos);
        if (start == std::string_view::npos) {
            break;
        }
        auto body = start + open.size();
        auto end = text.find(close, body);
        if (end == std::string_view::npos) {
            scan.unterminated = true;
            break;
        }
        scan.regions.emplace_back(text.substr(body, end - body));
        pos = end + close.size();
    }
    return scan;
}

std::optional<std::string> last_tag_region(std::string_view text, std::string_view open,
                                           std::string_view close)
{
    auto scan = scan_tag_regions(text, open, close);
    if (scan.regions.empty()) {
        return std::nullopt;
    }
    return scan.regions.back();
}

namespace {

// Returns [content_begin, content_end) of the \boxed{...} starting at `at`.
std::optional<std::pair<std::size_t, std::size_t>> boxed_span(std::string_view text, std::size_t at)
{
    constexpr std::string_view kBoxed = "\\boxed{";
    std::size_t i = at + kBoxed.size();
    int depth = 1;
    for (std::size_t j = i; j < text.size(); ++j) {
        if (text[j] == '{') {
            ++depth;
        } else if (text[j] == '}') {
            if (--depth == 0) {
                return std::make_pair(i, j);
            }
        }
    }
    return std::nullopt;
}

} // namespace

std::optional<std::string> last_boxed(std::string_view text)
{
    constexpr std::string_view kBoxed = "\\boxed{";
    std::optional<std::string> found;
    std::size_t pos = 0;
    while ((pos = text.find(kBoxed, pos)) != std::string_view::npos) {
        if (auto span = boxed_span(text, pos)) {
            found = std::string(text.substr(span->first, span->second - span->first));
            pos = span->second;
        } else {
            break;
        }
    }
    return found;
}

std::string normalize_answer(std::string_view answer)
{
    constexpr std::string_view kBoxed = "\\boxed{";
    std::string out;
    out.reserve(answer.size());
    std::size_t i = 0;
    while (i < answer.size()) {
        if (answer.substr(i).starts_with(kBoxed)) {
            if (auto span = boxed_span(answer, i)) {
                out += normalize_answer(answer.substr(span->first, span->second - span->first));
                i = span->second + 1;
                continue;
            }
        }
        if (answer[i] != '$') {
            out += answer[i];
        }
        ++i;
    }
    return collapse_whitespace(out);
}

std::string trim(std::string_view s)
{
    auto first = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
    auto last = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); });
    if (first >= last.base()) {
        return {};
    }
    return std::string(first, last.base());
}

std::string collapse_whitespace(std::string_view s)
{
    std::string out;
    bool pending_space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(c);
    }
    return out;
}

std::string to_lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> split_whitespace(std::string_view s)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
        }
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) {
            ++j;
        }
        if (j > i) {
            out.emplace_back(s.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

bool contains(std::string_view haystack, std::string_view needle)
{
    return haystack.find(needle) != std::string_view::npos;
}

bool starts_with_ci(std::string_view s, std::string_view prefix)
{
    if (s.size() < prefix.size()) {
        return false;
    }
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i]))) {
            return false;
        }
    }
    return true;
}

std::string format_fixed(double value, int decimals)
{
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

std::string utc_timestamp_now()
{
    using namespace std::chrono;
    auto now = system_clock::now();
    auto secs = system_clock::to_time_t(now);
    auto millis = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                  static_cast<int>(millis));
    return buf;
}

std::uint64_t fnv1a64(std::string_view data)
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t value)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

} // namespace rethinker
