#include "rethinker/judge.hpp"

#include "rethinker/prompts.hpp"
#include "rethinker/text.hpp"

#include <spdlog/spdlog.h>

#include <sstream>

namespace rethinker {

std::optional<bool> ExactMatchJudge::correct(std::string_view, std::string_view prediction, std::string_view gold,
                                             std::string_view)
{
    return normalize_answer(prediction) == normalize_answer(gold);
}

std::optional<bool> ExactMatchJudge::consistent(std::string_view, std::string_view reasoning,
                                                std::string_view final_answer, std::string_view)
{
    auto boxed = last_boxed(reasoning);
    if (!boxed) {
        return true;
    }
    return normalize_answer(*boxed) == normalize_answer(final_answer);
}

std::optional<bool> parse_verdict(std::string_view text, std::string_view yes, std::string_view no)
{
    std::istringstream in{std::string(text)};
    std::string line;
    std::optional<std::string> last;
    while (std::getline(in, line)) {
        auto t = trim(line);
        while (!t.empty() && t.front() == '*') {
            t.erase(0, 1);
        }
        if (starts_with_ci(t, "VERDICT:")) {
            last = t.substr(8);
        }
    }
    if (!last) {
        return std::nullopt;
    }
    auto value = to_lower(trim(*last));
    while (!value.empty() && (value.back() == '*' || value.back() == '.')) {
        value.pop_back();
    }
    value = trim(value);
    if (value == to_lower(yes)) {
        return true;
    }
    if (value == to_lower(no)) {
        return false;
    }
    return std::nullopt;
}

LlmJudge::LlmJudge(Gateway& gateway, TraceWriter* trace) : gateway_(gateway), trace_(trace) {}

std::optional<bool> LlmJudge::ask(std::string prompt, std::string_view kind, std::string_view item_id,
                                  std::string_view yes, std::string_view no)
{
    TraceContext ctx{std::string(item_id), 0, Stage::judge, 0};
    std::vector<Message> messages{Message{Role::user, std::move(prompt), std::nullopt}};
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto tag = "[judge=" + std::string(kind) + "][item=" + std::string(item_id) + "][attempt=" +
                   std::to_string(attempt) + "]";
        auto request = gateway_.make_request(Stage::judge, messages, std::move(tag));
        auto result = gateway_.generate(request);
        if (trace_) {
            trace_->append_model(ctx, request, result);
        }
        if (auto v = parse_verdict(result.text, yes, no)) {
            return v;
        }
        spdlog::warn("judge ({}) for {}: unparseable verdict (attempt {})", kind, item_id, attempt + 1);
    }
    return std::nullopt;
}

std::optional<bool> LlmJudge::correct(std::string_view question, std::string_view prediction, std::string_view gold,
                                      std::string_view item_id)
{
    return ask(render_judge_prompt(question, prediction, gold), "correct", item_id, "yes", "no");
}

std::optional<bool> LlmJudge::consistent(std::string_view question, std::string_view reasoning,
                                         std::string_view final_answer, std::string_view item_id)
{
    return ask(render_consistency_prompt(question, reasoning, final_answer), "consistency", item_id, "consistent",
               "contradictory");
}

} // namespace rethinker
