#pragma once
// web_search and web_parse.
//
// Replay mode serves canned responses from a fixture directory so the whole
// engine runs offline and deterministically. Fixture files are named
// "<tool>-<fnv1a64 of tool + canonical args JSON>.txt":
//   web_search: args {"keywords": k}         -> formatted result list
//   web_parse:  args {"link": url}           -> page markdown (pre-condensing)
// Live mode calls Serper (search) and Jina Reader (page to markdown).

#include "rethinker/gateway.hpp"
#include "rethinker/trace.hpp"
#include "rethinker/types.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace rethinker {

struct WebToolsConfig {
    enum class Mode { disabled, replay, live };

    Mode mode = Mode::disabled;
    std::filesystem::path fixtures_dir;
    std::string serper_api_key;
    std::string jina_api_key;
    std::string serper_endpoint = "https://google.serper.dev/search";
    std::string jina_endpoint = "https://r.jina.ai/";
    std::size_t max_search_results = 10;

    static WebToolsConfig replay(std::filesystem::path dir);
    // RETHINKER_SERPER_API_KEY, RETHINKER_JINA_API_KEY.
    static WebToolsConfig live_from_env();
};

std::filesystem::path fixture_path(const std::filesystem::path& dir, std::string_view tool, const Json& args);
void write_fixture(const std::filesystem::path& dir, std::string_view tool, const Json& args,
                   std::string_view content);

bool is_valid_url(std::string_view url);

// Keeps at most `max_pages` "### Web Page" blocks under "## Other Relevant
// Web Pages" and clamps each relevance score into [0, 1].
std::string limit_relevant_pages(std::string_view markdown, std::size_t max_pages = 2);

class WebTools {
public:
    // `condenser` may be null when web_parse is never used.
    WebTools(WebToolsConfig config, Gateway* condenser);

    // Throws std::invalid_argument (empty keywords), FixtureMiss,
    // TransportError / QuotaExceeded (live).
    std::string web_search(std::string_view keywords) const;

    // Page fetch only (markdown), no condensing.
    std::string fetch_page(std::string_view link) const;

    // Fetch, then condense with one generation using the web-search
    // conclusion prompt; the result lists at most two related pages.
    std::string web_parse(std::string_view link, std::string_view query, const TraceContext& ctx) const;

    const WebToolsConfig& config() const noexcept { return config_; }

private:
    std::string replay(std::string_view tool, const Json& args) const;

    WebToolsConfig config_;
    Gateway* condenser_;
};

} // namespace rethinker
