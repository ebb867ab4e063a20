#include "rethinker/errors.hpp"
#include "rethinker/gateway.hpp"
#include "rethinker/text.hpp"

#include "http_util.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>

namespace rethinker {

HttpBackendConfig HttpBackendConfig::from_env()
{
    auto env = [](const char* name) {
        const char* v = std::getenv(name);
        return v ? std::string(v) : std::string();
    };
    HttpBackendConfig c;
    c.base_url = env("RETHINKER_LLM_BASE_URL");
    c.api_key = env("RETHINKER_LLM_API_KEY");
    c.model = env("RETHINKER_LLM_MODEL");
    return c;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config))
{
    if (!detail::split_url(config_.base_url)) {
        throw ConfigError("RETHINKER_LLM_BASE_URL", "not an http(s) URL: '" + config_.base_url + "'");
    }
    if (config_.model.empty()) {
        throw ConfigError("RETHINKER_LLM_MODEL", "model name is required");
    }
}

Json HttpBackend::build_body(const GenerationRequest& request) const
{
    Json messages = Json::array();
    for (const auto& m : request.messages) {
        // Tool feedback is carried as user turns; the endpoint never sees tool roles.
        auto role = m.role == Role::tool ? Role::user : m.role;
        messages.push_back(Json{{"role", to_string(role)}, {"content", m.content}});
    }
    Json body{{"model", config_.model},
              {"messages", messages},
              {"temperature", request.temperature},
              {"top_p", request.top_p},
              {"max_tokens", request.max_tokens}};
    if (request.want_logprobs) {
        body["logprobs"] = true;
    }
    if (!request.stop_markers.empty()) {
        body["stop"] = request.stop_markers;
    }
    return body;
}

GenerationResult HttpBackend::parse_response(const Json& body, const GenerationRequest& request)
{
    if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
        throw TransportError("malformed completion response: no choices");
    }
    const auto& choice = body["choices"][0];
    GenerationResult result;
    const auto& message = choice.value("message", Json::object());
    if (message.contains("content") && message["content"].is_string()) {
        result.text = message["content"].get<std::string>();
    }
    const auto finish = choice.value("finish_reason", std::string("stop"));
    if (finish == "content_filter") {
        throw RefusalError("backend refused the request (content_filter)");
    }
    result.finish_reason = finish == "length" ? FinishReason::length : FinishReason::stop;

    // Providers drop the stop string itself; restore the closing tag so the
    // code block is well formed.
    bool pauses_on_code = std::find(request.stop_markers.begin(), request.stop_markers.end(),
                                    "</code>") != request.stop_markers.end();
    if (pauses_on_code && result.finish_reason == FinishReason::stop &&
        scan_tag_regions(result.text, "<code>", "</code>").unterminated) {
        result.text += "</code>";
        result.finish_reason = FinishReason::tool_pause;
    }

    if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
        choice["logprobs"].contains("content") && choice["logprobs"]["content"].is_array()) {
        std::vector<TokenLogprob> lps;
        for (const auto& t : choice["logprobs"]["content"]) {
            lps.push_back(TokenLogprob{t.value("token", std::string{}), t.value("logprob", 0.0)});
        }
        result.token_logprobs = std::move(lps);
    }
    if (body.contains("usage") && body["usage"].is_object()) {
        result.usage.prompt_tokens = body["usage"].value("prompt_tokens", 0);
        result.usage.completion_tokens = body["usage"].value("completion_tokens", 0);
    }
    return result;
}

GenerationResult HttpBackend::complete(const GenerationRequest& request)
{
    auto url = *detail::split_url(config_.base_url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(std::chrono::seconds(30));
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(std::chrono::seconds(60));
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }
    std::string path = url.path;
    if (!path.ends_with('/')) {
        path += '/';
    }
    path += "chat/completions";

    auto res = client.Post(path, headers, build_body(request).dump(), "application/json");
    if (!res) {
        throw TransportError("HTTP transport failure: " + httplib::to_string(res.error()));
    }
    if (res->status == 429 || res->status >= 500) {
        throw TransportError("HTTP " + std::to_string(res->status) + " from " + config_.base_url);
    }
    if (res->status >= 400) {
        throw RequestError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500));
    }
    auto body = Json::parse(res->body, nullptr, false);
    if (body.is_discarded()) {
        throw TransportError("completion response is not JSON");
    }
    return parse_response(body, request);
}

} // namespace rethinker
