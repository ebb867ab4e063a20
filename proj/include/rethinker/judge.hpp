#pragma once
// Verdict providers for correctness and reasoning/answer consistency.

#include "rethinker/gateway.hpp"
#include "rethinker/trace.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace rethinker {

class Judge {
public:
    virtual ~Judge() = default;
    // nullopt: no parsable verdict (after the judge's own retry).
    virtual std::optional<bool> correct(std::string_view question, std::string_view prediction,
                                        std::string_view gold, std::string_view item_id) = 0;
    virtual std::optional<bool> consistent(std::string_view question, std::string_view reasoning,
                                           std::string_view final_answer, std::string_view item_id) = 0;
};

// Offline judge: normalized string equality. Reasoning contradicts the
// answer only when its last \boxed{} value differs from it.
class ExactMatchJudge : public Judge {
public:
    std::optional<bool> correct(std::string_view question, std::string_view prediction, std::string_view gold,
                                std::string_view item_id) override;
    std::optional<bool> consistent(std::string_view question, std::string_view reasoning,
                                   std::string_view final_answer, std::string_view item_id) override;
};

// Last "VERDICT: <token>" line; `yes` / `no` are the accepted tokens
// (case-insensitive). Anything else is nullopt.
std::optional<bool> parse_verdict(std::string_view text, std::string_view yes, std::string_view no);

// One judge generation per verdict, repeated once when the verdict does not
// parse. Tags look like "[judge=correct][item=<id>][attempt=<k>]".
class LlmJudge : public Judge {
public:
    LlmJudge(Gateway& gateway, TraceWriter* trace = nullptr);

    std::optional<bool> correct(std::string_view question, std::string_view prediction, std::string_view gold,
                                std::string_view item_id) override;
    std::optional<bool> consistent(std::string_view question, std::string_view reasoning,
                                   std::string_view final_answer, std::string_view item_id) override;

private:
    std::optional<bool> ask(std::string prompt, std::string_view kind, std::string_view item_id,
                            std::string_view yes, std::string_view no);

    Gateway& gateway_;
    TraceWriter* trace_;
};

} // namespace rethinker
