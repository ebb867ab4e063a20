#pragma once
// Deterministic scripted backend.
//
// Script file: JSONL rows {"match": "<substring>", "text": "<response>",
// "logprobs": [floats]?}. Rules are tried in file order against the request's
// match subject (tag line + message contents, see mock_subject); the first
// rule whose substring occurs wins. A row with "match": "*" replaces the
// default response.

#include "rethinker/gateway.hpp"

#include <filesystem>
#include <istream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace rethinker {

inline constexpr const char* kDefaultMockText = "[mock: no matching rule]";

struct MockRule {
    std::string match;
    std::string text;
    std::optional<std::vector<double>> logprobs;
};

struct MockScript {
    std::vector<MockRule> rules;
    MockRule fallback{"*", kDefaultMockText, std::nullopt};
};

MockScript parse_mock_script(std::istream& in);
MockScript load_mock_script(const std::filesystem::path& path);

// Text the rules are matched against: the tag on the first line, then every
// message's content separated by newlines.
std::string mock_subject(const GenerationRequest& request);

struct MockExchange {
    std::string tag;
    std::string subject;
    std::string response;
};

class MockBackend : public Backend {
public:
    explicit MockBackend(MockScript script);

    // Applies the first matching rule, then max_tokens (whitespace tokens,
    // finish_reason length) and stop markers (cut after the marker,
    // finish_reason tool_pause).
    GenerationResult complete(const GenerationRequest& request) override;
    std::string name() const override { return "mock"; }

    std::vector<MockExchange> request_log() const;
    std::size_t call_count() const;
    // Number of logged requests whose tag contains `fragment`.
    std::size_t count_tagged(std::string_view fragment) const;

private:
    MockScript script_;
    mutable std::mutex mutex_;
    std::vector<MockExchange> log_;
};

} // namespace rethinker
