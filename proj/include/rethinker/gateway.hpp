#pragma once
// Uniform generation interface over model backends.
//
// Callers build requests through Gateway::make_request, which stamps the
// sampling parameters for the call's stage (selector calls get
// top_p_selector, everything else top_p_global). Nothing above this layer
// sees a wire format.

#include "rethinker/types.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

namespace rethinker {

enum class FinishReason { stop, length, tool_pause };

std::string_view to_string(FinishReason reason);

struct Usage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct GenerationRequest {
    std::vector<Message> messages;
    double temperature = 1.0;
    double top_p = 1.0;
    int max_tokens = 8192;
    bool want_logprobs = false;
    std::vector<std::string> stop_markers;
    Stage stage = Stage::solver;
    // Routing label such as "[query=q1][path=2][stage=solver][round=0][step=1]".
    // Visible to mocks and traces, never sent to a remote endpoint.
    std::string tag;
};

struct GenerationResult {
    std::string text;
    std::optional<std::vector<TokenLogprob>> token_logprobs;
    FinishReason finish_reason = FinishReason::stop;
    Usage usage;
    int attempts = 1;
};

class Backend {
public:
    virtual ~Backend() = default;

    // May throw TransportError (retried by the gateway), RequestError,
    // RefusalError.
    virtual GenerationResult complete(const GenerationRequest& request) = 0;
    virtual std::size_t max_in_flight() const { return 16; }
    virtual std::string name() const = 0;
};

// Backend driven by a callable; handy for tests and adapters.
class FunctionBackend : public Backend {
public:
    using Fn = std::function<GenerationResult(const GenerationRequest&)>;

    explicit FunctionBackend(Fn fn, std::string name = "function") : fn_(std::move(fn)), name_(std::move(name)) {}

    GenerationResult complete(const GenerationRequest& request) override { return fn_(request); }
    std::string name() const override { return name_; }

private:
    Fn fn_;
    std::string name_;
};

class Gateway {
public:
    using SleepFn = std::function<void(std::chrono::milliseconds)>;

    Gateway(std::shared_ptr<Backend> backend, RunConfig config);

    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    GenerationRequest make_request(Stage stage, std::vector<Message> messages, std::string tag,
                                   std::vector<std::string> stop_markers = {}) const;

    // Validates, waits for an in-flight slot, calls the backend and retries
    // TransportError up to max_retries times with exponential backoff.
    // Throws LogprobsUnsupported when logprobs were requested but not
    // returned, unless the config maps that to an uninformative score.
    GenerationResult generate(const GenerationRequest& request);

    void set_sleep(SleepFn sleep) { sleep_ = std::move(sleep); }

    const RunConfig& config() const noexcept { return config_; }
    Backend& backend() noexcept { return *backend_; }
    std::uint64_t total_attempts() const noexcept { return attempts_.load(); }
    std::uint64_t total_calls() const noexcept { return calls_.load(); }

private:
    void validate(const GenerationRequest& request) const;

    std::shared_ptr<Backend> backend_;
    RunConfig config_;
    SleepFn sleep_;
    std::counting_semaphore<4096> slots_;
    std::atomic<std::uint64_t> attempts_{0};
    std::atomic<std::uint64_t> calls_{0};
};

// OpenAI-style chat-completions endpoint.
struct HttpBackendConfig {
    std::string base_url;        // e.g. https://api.openai.com/v1
    std::string api_key;
    std::string model;
    std::chrono::seconds timeout{600};
    std::size_t max_in_flight = 8;

    // RETHINKER_LLM_BASE_URL, RETHINKER_LLM_API_KEY, RETHINKER_LLM_MODEL.
    static HttpBackendConfig from_env();
};

class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    GenerationResult complete(const GenerationRequest& request) override;
    std::size_t max_in_flight() const override { return config_.max_in_flight; }
    std::string name() const override { return "http:" + config_.base_url; }

    // Exposed for tests: request body and response parsing.
    Json build_body(const GenerationRequest& request) const;
    static GenerationResult parse_response(const Json& body, const GenerationRequest& request);

private:
    HttpBackendConfig config_;
};

} // namespace rethinker
