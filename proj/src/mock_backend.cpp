#include "rethinker/mock_backend.hpp"

#include "rethinker/errors.hpp"
#include "rethinker/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace rethinker {

MockScript parse_mock_script(std::istream& in)
{
    MockScript script;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        auto row = Json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.is_object()) {
            throw ParseError(lineno, "mock script row is not a JSON object");
        }
        if (!row.contains("match") || !row["match"].is_string()) {
            throw ParseError(lineno, "mock script row needs a string `match`");
        }
        if (!row.contains("text") || !row["text"].is_string()) {
            throw ParseError(lineno, "mock script row needs a string `text`");
        }
        MockRule rule{row["match"].get<std::string>(), row["text"].get<std::string>(), std::nullopt};
        if (row.contains("logprobs") && !row["logprobs"].is_null()) {
            if (!row["logprobs"].is_array()) {
                throw ParseError(lineno, "`logprobs` must be an array of numbers");
            }
            std::vector<double> lps;
            for (const auto& v : row["logprobs"]) {
                if (!v.is_number()) {
                    throw ParseError(lineno, "`logprobs` must be an array of numbers");
                }
                lps.push_back(v.get<double>());
            }
            rule.logprobs = std::move(lps);
        }
        if (rule.match == "*") {
            script.fallback = std::move(rule);
        } else {
            script.rules.push_back(std::move(rule));
        }
    }
    return script;
}

MockScript load_mock_script(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(0, "cannot open mock script " + path.string());
    }
    return parse_mock_script(in);
}

std::string mock_subject(const GenerationRequest& request)
{
    std::string subject = request.tag;
    for (const auto& m : request.messages) {
        subject += '\n';
        subject += m.content;
    }
    return subject;
}

namespace {

// Byte offset just past the k-th whitespace-delimited token.
std::size_t end_of_token(std::string_view text, std::size_t k)
{
    std::size_t i = 0;
    std::size_t seen = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
        if (i == text.size()) {
            break;
        }
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
        if (++seen == k) {
            return i;
        }
    }
    return text.size();
}

} // namespace

MockBackend::MockBackend(MockScript script) : script_(std::move(script)) {}

GenerationResult MockBackend::complete(const GenerationRequest& request)
{
    const std::string subject = mock_subject(request);
    const MockRule* rule = &script_.fallback;
    for (const auto& r : script_.rules) {
        if (contains(subject, r.match)) {
            rule = &r;
            break;
        }
    }

    GenerationResult result;
    std::string text = rule->text;
    result.finish_reason = FinishReason::stop;

    std::size_t cut = std::string::npos;
    for (const auto& marker : request.stop_markers) {
        auto at = text.find(marker);
        if (at != std::string::npos && (cut == std::string::npos || at + marker.size() < cut)) {
            cut = at + marker.size();
        }
    }
    if (cut != std::string::npos && cut < text.size()) {
        text.resize(cut);
        result.finish_reason = FinishReason::tool_pause;
    }

    auto tokens = split_whitespace(text);
    const auto limit = static_cast<std::size_t>(std::max(request.max_tokens, 0));
    if (tokens.size() > limit) {
        text.resize(end_of_token(text, limit));
        tokens.resize(limit);
        result.finish_reason = FinishReason::length;
    }
    result.text = text;

    if (request.want_logprobs && rule->logprobs) {
        std::vector<TokenLogprob> lps;
        const auto& values = *rule->logprobs;
        // Verbatim unless the response was truncated.
        std::size_t keep = result.text.size() == rule->text.size() ? values.size()
                                                                     : std::min(values.size(), tokens.size());
        for (std::size_t i = 0; i < keep; ++i) {
            lps.push_back(TokenLogprob{i < tokens.size() ? tokens[i] : std::string{}, values[i]});
        }
        result.token_logprobs = std::move(lps);
    }

    int prompt_tokens = 0;
    for (const auto& m : request.messages) {
        prompt_tokens += static_cast<int>(split_whitespace(m.content).size());
    }
    result.usage = Usage{prompt_tokens, static_cast<int>(tokens.size())};

    std::lock_guard lock(mutex_);
    log_.push_back(MockExchange{request.tag, subject, result.text});
    return result;
}

std::vector<MockExchange> MockBackend::request_log() const
{
    std::lock_guard lock(mutex_);
    return log_;
}

std::size_t MockBackend::call_count() const
{
    std::lock_guard lock(mutex_);
    return log_.size();
}

std::size_t MockBackend::count_tagged(std::string_view fragment) const
{
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& e : log_) {
        n += contains(e.tag, fragment) ? 1 : 0;
    }
    return n;
}

} // namespace rethinker
