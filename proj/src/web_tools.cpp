#include "rethinker/web_tools.hpp"

#include "rethinker/errors.hpp"
#include "rethinker/prompts.hpp"
#include "rethinker/text.hpp"

#include "http_util.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rethinker {

WebToolsConfig WebToolsConfig::replay(std::filesystem::path dir)
{
    WebToolsConfig c;
    c.mode = Mode::replay;
    c.fixtures_dir = std::move(dir);
    return c;
}

WebToolsConfig WebToolsConfig::live_from_env()
{
    auto env = [](const char* name) {
        const char* v = std::getenv(name);
        return v ? std::string(v) : std::string();
    };
    WebToolsConfig c;
    c.mode = Mode::live;
    c.serper_api_key = env("RETHINKER_SERPER_API_KEY");
    c.jina_api_key = env("RETHINKER_JINA_API_KEY");
    return c;
}

std::filesystem::path fixture_path(const std::filesystem::path& dir, std::string_view tool, const Json& args)
{
    std::string key(tool);
    key += '\n';
    key += args.dump();
    return dir / (std::string(tool) + "-" + hex64(fnv1a64(key)) + ".txt");
}

void write_fixture(const std::filesystem::path& dir, std::string_view tool, const Json& args,
                   std::string_view content)
{
    std::filesystem::create_directories(dir);
    std::ofstream out(fixture_path(dir, tool, args), std::ios::binary);
    out << content;
}

bool is_valid_url(std::string_view url)
{
    auto parts = detail::split_url(url);
    if (!parts || contains(url, " ")) {
        return false;
    }
    auto host = parts->origin.substr(parts->origin.find("://") + 3);
    return host.find('.') != std::string::npos || host.starts_with("localhost");
}

std::string limit_relevant_pages(std::string_view markdown, std::size_t max_pages)
{
    std::istringstream in{std::string(markdown)};
    std::ostringstream out;
    std::string line;
    bool in_pages = false;
    bool dropping = false;
    bool expect_score = false;
    std::size_t pages = 0;
    bool first = true;
    auto emit = [&](const std::string& l) {
        if (!first) {
            out << '\n';
        }
        out << l;
        first = false;
    };
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.starts_with("## ") && !t.starts_with("### ")) {
            in_pages = starts_with_ci(t, "## Other Relevant Web Pages");
            dropping = false;
            expect_score = false;
            emit(line);
            continue;
        }
        if (in_pages && t.starts_with("### ") && !t.starts_with("#### ")) {
            ++pages;
            dropping = pages > max_pages;
        }
        if (dropping) {
            continue;
        }
        if (in_pages && starts_with_ci(t, "#### Relevance Score")) {
            expect_score = true;
            emit(line);
            continue;
        }
        if (expect_score && !t.empty()) {
            expect_score = false;
            char* end = nullptr;
            double score = std::strtod(t.c_str(), &end);
            if (end != t.c_str()) {
                score = std::clamp(score, 0.0, 1.0);
                std::ostringstream s;
                s << score;
                emit(s.str());
                continue;
            }
        }
        emit(line);
    }
    return out.str();
}

WebTools::WebTools(WebToolsConfig config, Gateway* condenser)
    : config_(std::move(config)), condenser_(condenser)
{
}

std::string WebTools::replay(std::string_view tool, const Json& args) const
{
    auto path = fixture_path(config_.fixtures_dir, tool, args);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FixtureMiss(std::string(tool) + " fixture missing for " + args.dump() + " (" +
                          path.filename().string() + ")");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace {

httplib::Result checked(httplib::Result res, const std::string& what)
{
    if (!res) {
        throw TransportError(what + ": transport failure (" + httplib::to_string(res.error()) + ")");
    }
    if (res->status == 402 || res->status == 429) {
        throw QuotaExceeded(what + ": quota exceeded (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status >= 500) {
        throw TransportError(what + ": HTTP " + std::to_string(res->status));
    }
    if (res->status >= 400) {
        throw RequestError(what + ": HTTP " + std::to_string(res->status));
    }
    return res;
}

std::string format_search_results(const Json& body, std::size_t limit)
{
    std::ostringstream out;
    std::size_t i = 0;
    if (body.contains("organic") && body["organic"].is_array()) {
        for (const auto& r : body["organic"]) {
            if (i == limit) {
                break;
            }
            out << ++i << ". " << r.value("title", std::string{}) << "\n"
                << "URL: " << r.value("link", std::string{}) << "\n"
                << "Snippet: " << r.value("snippet", std::string{}) << "\n\n";
        }
    }
    if (i == 0) {
        return "No results found.";
    }
    return out.str();
}

} // namespace

std::string WebTools::web_search(std::string_view keywords) const
{
    if (trim(keywords).empty()) {
        throw std::invalid_argument("web_search: empty keywords");
    }
    Json args{{"keywords", std::string(keywords)}};
    switch (config_.mode) {
    case WebToolsConfig::Mode::disabled:
        throw FixtureMiss("web tools are disabled (no fixtures directory and not live)");
    case WebToolsConfig::Mode::replay:
        return replay("web_search", args);
    case WebToolsConfig::Mode::live:
        break;
    }
    if (config_.serper_api_key.empty()) {
        throw RequestError("web_search: RETHINKER_SERPER_API_KEY is not set");
    }
    auto url = detail::split_url(config_.serper_endpoint);
    if (!url) {
        throw RequestError("web_search: bad endpoint " + config_.serper_endpoint);
    }
    httplib::Client client(url->origin);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(std::chrono::seconds(60));
    httplib::Headers headers{{"X-API-KEY", config_.serper_api_key}};
    Json body{{"q", std::string(keywords)}};
    auto res = checked(client.Post(url->path, headers, body.dump(), "application/json"), "web_search");
    auto parsed = Json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) {
        throw TransportError("web_search: response is not JSON");
    }
    return format_search_results(parsed, config_.max_search_results);
}

std::string WebTools::fetch_page(std::string_view link) const
{
    if (!is_valid_url(link)) {
        throw std::invalid_argument("web_parse: malformed URL '" + std::string(link) + "'");
    }
    Json args{{"link", std::string(link)}};
    switch (config_.mode) {
    case WebToolsConfig::Mode::disabled:
        throw FixtureMiss("web tools are disabled (no fixtures directory and not live)");
    case WebToolsConfig::Mode::replay:
        return replay("web_parse", args);
    case WebToolsConfig::Mode::live:
        break;
    }
    auto url = detail::split_url(config_.jina_endpoint);
    if (!url) {
        throw RequestError("web_parse: bad endpoint " + config_.jina_endpoint);
    }
    httplib::Client client(url->origin);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(std::chrono::seconds(120));
    httplib::Headers headers{{"X-Return-Format", "markdown"}};
    if (!config_.jina_api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.jina_api_key);
    }
    auto res = checked(client.Get(url->path + std::string(link), headers), "web_parse");
    return res->body;
}

std::string WebTools::web_parse(std::string_view link, std::string_view query, const TraceContext& ctx) const
{
    auto page = fetch_page(link);
    if (!condenser_) {
        throw RequestError("web_parse: no condenser model configured");
    }
    std::vector<Message> messages{Message{Role::user, render_web_conclusion_prompt(query, page), std::nullopt}};
    auto tag = ctx.tag() + "[tool=web_parse]";
    auto request = condenser_->make_request(Stage::web_parse, std::move(messages), std::move(tag));
    auto result = condenser_->generate(request);
    return limit_relevant_pages(result.text, 2);
}

} // namespace rethinker
