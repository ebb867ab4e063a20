#include "rethinker/gateway.hpp"

#include "rethinker/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <thread>

namespace rethinker {

std::string_view to_string(FinishReason reason)
{
    switch (reason) {
    case FinishReason::stop:
        return "stop";
    case FinishReason::length:
        return "length";
    case FinishReason::tool_pause:
        return "tool_pause";
    }
    return "?";
}

namespace {

std::ptrdiff_t slot_count(const Backend& backend)
{
    auto n = std::clamp<std::size_t>(backend.max_in_flight(), 1, 4096);
    return static_cast<std::ptrdiff_t>(n);
}

struct SlotGuard {
    std::counting_semaphore<4096>& sem;
    explicit SlotGuard(std::counting_semaphore<4096>& s) : sem(s) { sem.acquire(); }
    ~SlotGuard() { sem.release(); }
};

} // namespace

Gateway::Gateway(std::shared_ptr<Backend> backend, RunConfig config)
    : backend_(std::move(backend)),
      config_(std::move(config)),
      sleep_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      slots_(slot_count(*backend_))
{
}

GenerationRequest Gateway::make_request(Stage stage, std::vector<Message> messages, std::string tag,
                                        std::vector<std::string> stop_markers) const
{
    GenerationRequest r;
    r.messages = std::move(messages);
    r.temperature = config_.temperature;
    r.top_p = stage == Stage::selector ? config_.top_p_selector : config_.top_p_global;
    r.max_tokens = config_.max_output_tokens;
    r.want_logprobs = stage == Stage::selector || config_.logprobs_for_all_calls;
    r.stop_markers = std::move(stop_markers);
    r.stage = stage;
    r.tag = std::move(tag);
    return r;
}

void Gateway::validate(const GenerationRequest& r) const
{
    if (r.messages.empty()) {
        throw RequestError("generation request has no messages");
    }
    if (r.temperature < 0.0) {
        throw RequestError("temperature must be >= 0");
    }
    if (!(r.top_p > 0.0 && r.top_p <= 1.0)) {
        throw RequestError("top_p must be in (0,1]");
    }
    if (r.max_tokens < 1 || r.max_tokens > config_.max_output_tokens) {
        throw RequestError("max_tokens must be in [1, " + std::to_string(config_.max_output_tokens) + "]");
    }
}

GenerationResult Gateway::generate(const GenerationRequest& request)
{
    validate(request);
    SlotGuard slot(slots_);
    calls_.fetch_add(1);
    int attempt = 0;
    while (true) {
        ++attempt;
        attempts_.fetch_add(1);
        try {
            GenerationResult result = backend_->complete(request);
            result.attempts = attempt;
            if (request.want_logprobs && !result.token_logprobs &&
                !config_.missing_logprobs_as_uninformative) {
                throw LogprobsUnsupported(backend_->name() + " returned no token log-probabilities");
            }
            return result;
        } catch (const TransportError& e) {
            if (attempt > config_.max_retries) {
                throw;
            }
            auto delay = std::chrono::milliseconds(config_.retry_backoff_ms) * (1 << std::min(attempt - 1, 10));
            spdlog::warn("{}: transient failure (attempt {}): {}; retrying in {} ms", backend_->name(),
                         attempt, e.what(), delay.count());
            sleep_(delay);
        }
    }
}

} // namespace rethinker
