#include "rethinker/selector.hpp"

#include "rethinker/confidence.hpp"
#include "rethinker/errors.hpp"
#include "rethinker/prompts.hpp"
#include "rethinker/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <regex>

namespace rethinker {

std::string candidate_display_text(const CandidateAnswer& candidate)
{
    const auto& msgs = candidate.source_trajectory.messages;
    for (auto it = msgs.rbegin(); it != msgs.rend(); ++it) {
        if (it->role == Role::assistant && contains(it->content, "<answer>")) {
            return it->content;
        }
    }
    return "<answer>" + candidate.answer_text + "</answer>";
}

std::string render_selector_prompt(std::string_view query, const std::vector<const CandidateAnswer*>& presented,
                                   const std::optional<std::string>& history_text)
{
    if (presented.empty()) {
        throw SelectionError("selector prompt needs at least one candidate");
    }
    std::string responses;
    for (std::size_t p = 0; p < presented.size(); ++p) {
        if (p) {
            responses += "\n\n";
        }
        responses += "Response " + std::to_string(p + 1) + ":\n" + candidate_display_text(*presented[p]);
    }
    return render_selector_template(query, presented.size(), responses, history_text);
}

ParsedSelection parse_selection(std::string_view text, int n, const Permutation& perm)
{
    static const std::regex tag(R"(<select>\s*Response\s*(\d+)\s*</select>)", std::regex::icase);
    if (static_cast<int>(perm.size()) != n) {
        throw std::invalid_argument("parse_selection: permutation size differs from candidate count");
    }
    std::string s(text);
    std::optional<int> last_valid;
    std::optional<std::string> last_seen;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), tag); it != std::sregex_iterator(); ++it) {
        const auto digits = (*it)[1].str();
        last_seen = digits;
        if (digits.size() > 6) {
            continue;
        }
        int x = std::stoi(digits);
        if (x >= 1 && x <= n) {
            last_valid = x;
        }
    }
    if (!last_valid) {
        if (last_seen) {
            throw SelectionError("selection Response " + *last_seen + " is out of range 1.." + std::to_string(n));
        }
        throw SelectionError("no <select>Response X</select> tag found");
    }
    return ParsedSelection{*last_valid, perm[static_cast<std::size_t>(*last_valid - 1)]};
}

std::string format_history(const std::vector<SelectionRecord>& records)
{
    if (records.empty()) {
        throw std::invalid_argument("format_history: no records");
    }
    std::string out;
    for (const auto& r : records) {
        if (!out.empty()) {
            out += '\n';
        }
        out += "Round " + std::to_string(r.round) + ": Response " + std::to_string(r.chosen) +
               " (entropy: " + format_fixed(r.perplexity, 4) + ")";
    }
    return out;
}

std::optional<std::string> parse_verbal_confidence(std::string_view text)
{
    static const std::regex conf(
        R"(confidence(?:\s+(?:level|score|estimate))?\s*(?:is|of)?\s*[:=]?\s*\**\s*(\d+(?:\.\d+)?\s*%?|very high|high|medium|moderate|low))",
        std::regex::icase);
    std::string s(text);
    std::smatch m;
    if (std::regex_search(s, m, conf)) {
        return m[1].str();
    }
    return std::nullopt;
}

namespace {

PerplexityScore round_perplexity(const Trajectory& t, const RunConfig& config)
{
    std::vector<double> lps;
    for (const auto& m : t.messages) {
        if (m.role != Role::assistant) {
            continue;
        }
        if (!m.token_logprobs) {
            if (config.missing_logprobs_as_uninformative) {
                return uninformative_score();
            }
            throw LogprobsUnsupported("selector generation carried no token log-probabilities");
        }
        for (const auto& tl : *m.token_logprobs) {
            lps.push_back(tl.logprob);
        }
    }
    if (lps.empty()) {
        if (config.missing_logprobs_as_uninformative) {
            return uninformative_score();
        }
        throw LogprobsUnsupported("selector generation carried no token log-probabilities");
    }
    return perplexity(lps);
}

std::string last_assistant_text(const Trajectory& t)
{
    for (auto it = t.messages.rbegin(); it != t.messages.rend(); ++it) {
        if (it->role == Role::assistant) {
            return it->content;
        }
    }
    return {};
}

struct RoundResult {
    Trajectory trajectory;
    std::optional<SelectionRecord> record;
};

// One selector round over `presented` (already permuted); `perm` maps
// presented positions to positions in `pool`.
RoundResult run_round(const Query& q, int round, const std::vector<const CandidateAnswer*>& pool,
                      const Permutation& perm, const std::optional<std::string>& history, bool adjudication,
                      EngineContext& engine)
{
    const int n = static_cast<int>(pool.size());
    std::vector<const CandidateAnswer*> presented;
    for (int p : perm) {
        presented.push_back(pool[static_cast<std::size_t>(p - 1)]);
    }
    AgentLoopOptions options;
    options.ctx = TraceContext{q.id, 0, Stage::selector, round};
    options.terminal = AgentLoopOptions::Terminal::select;
    std::vector<Message> initial{Message{Role::user, render_selector_prompt(q.text, presented, history), std::nullopt}};

    RoundResult out;
    out.trajectory = run_agent_loop(std::move(initial), engine.gateway, engine.executor, engine.trace, options);

    std::optional<ParsedSelection> parsed;
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            parsed = parse_selection(last_assistant_text(out.trajectory), n, perm);
            break;
        } catch (const SelectionError& e) {
            spdlog::warn("query {}: selector round {}: {}", q.id, round, e.what());
            if (attempt == 1) {
                break;
            }
            auto again = std::string(e.what()) + ". End your reply with FINAL DECISION: <select>Response X</select>"
                         " where X is between 1 and " + std::to_string(n) + ".";
            if (!extend_trajectory(out.trajectory, std::move(again), engine.gateway, engine.trace, options)) {
                break;
            }
        }
    }
    if (!parsed) {
        return out;
    }

    SelectionRecord rec;
    rec.round = round;
    rec.chosen = pool[static_cast<std::size_t>(parsed->original_index - 1)]->path_index;
    rec.perplexity = round_perplexity(out.trajectory, engine.gateway.config()).value;
    rec.rationale_text = last_assistant_text(out.trajectory);
    for (const auto* c : presented) {
        rec.presented_order.push_back(c->path_index);
    }
    rec.adjudication = adjudication;
    rec.verbal_confidence = parse_verbal_confidence(rec.rationale_text);
    out.record = std::move(rec);
    return out;
}

const CandidateAnswer& by_path(const std::vector<const CandidateAnswer*>& live, int path_index)
{
    for (const auto* c : live) {
        if (c->path_index == path_index) {
            return *c;
        }
    }
    throw SelectionError("selected path " + std::to_string(path_index) + " is not a live candidate");
}

} // namespace

SelectionOutcome select(const Query& q, const std::vector<CandidateAnswer>& candidates, EngineContext& engine,
                        const LatinSquare* square)
{
    std::vector<const CandidateAnswer*> live;
    for (const auto& c : candidates) {
        if (!c.failed) {
            live.push_back(&c);
        }
    }
    std::sort(live.begin(), live.end(), [](auto* a, auto* b) { return a->path_index < b->path_index; });
    if (live.empty()) {
        throw SelectionError("query " + q.id + ": no live candidates to select from");
    }
    SelectionOutcome out;
    if (live.size() == 1) {
        out.winner = *live.front();
        out.bypassed = true;
        return out;
    }

    const auto n = live.size();
    std::optional<LatinSquare> own;
    if (!square) {
        own = build_cyclic(n);
        square = &*own;
    }
    if (square->order() != n) {
        throw SelectionError("Latin square order " + std::to_string(square->order()) + " != live candidates " +
                             std::to_string(n));
    }

    const auto& config = engine.gateway.config();
    auto& records = out.history.records;
    int next_round = 0;
    auto run = [&](std::size_t row, const std::optional<std::string>& history) {
        auto rr = run_round(q, next_round, live, row_for_round(*square, row), history, false, engine);
        ++next_round;
        out.rounds.push_back(std::move(rr.trajectory));
        if (rr.record) {
            records.push_back(std::move(*rr.record));
        }
    };

    run(0, std::nullopt);
    for (int r = 1; r <= config.r_selector; ++r) {
        if (!records.empty()) {
            PerplexityScore latest{records.back().perplexity, 1};
            if (!gate_triggers_reselection(latest, config.ppl_gate_threshold)) {
                break;
            }
        }
        std::optional<std::string> history;
        if (!records.empty()) {
            history = format_history(records);
        }
        // Row index follows the algorithm's round counter, not executed rounds.
        run(static_cast<std::size_t>(r), history);
    }

    if (records.empty()) {
        throw SelectionError("query " + q.id + ": no selector round produced a parsable selection");
    }
    for (const auto& r : records) {
        out.history.chosen_set.insert(r.chosen);
    }
    if (out.history.chosen_set.size() == 1) {
        out.winner = by_path(live, *out.history.chosen_set.begin());
        return out;
    }

    std::vector<const CandidateAnswer*> shortlist;
    for (int idx : out.history.chosen_set) {
        shortlist.push_back(&by_path(live, idx));
    }
    Permutation identity(shortlist.size());
    for (std::size_t i = 0; i < identity.size(); ++i) {
        identity[i] = static_cast<int>(i + 1);
    }
    auto adj = run_round(q, next_round, shortlist, identity, format_history(records), true, engine);
    out.rounds.push_back(std::move(adj.trajectory));
    if (adj.record) {
        out.winner = by_path(live, adj.record->chosen);
        records.push_back(std::move(*adj.record));
        return out;
    }

    // Lowest perplexity wins; earliest round on ties.
    const SelectionRecord* best = &records.front();
    for (const auto& r : records) {
        if (r.perplexity < best->perplexity) {
            best = &r;
        }
    }
    spdlog::warn("query {}: adjudication did not parse; using round {} (lowest perplexity)", q.id, best->round);
    out.winner = by_path(live, best->chosen);
    out.fallback = true;
    return out;
}

Json selection_report(const Query& q, const std::vector<CandidateAnswer>& candidates,
                      const SelectionOutcome& outcome)
{
    Json rounds = Json::array();
    for (const auto& r : outcome.history.records) {
        rounds.push_back(Json{{"round", r.round},
                              {"presented_order", r.presented_order},
                              {"chosen", r.chosen},
                              {"perplexity", std::isfinite(r.perplexity) ? Json(r.perplexity) : Json(nullptr)},
                              {"adjudication", r.adjudication},
                              {"verbal_confidence", r.verbal_confidence ? Json(*r.verbal_confidence) : Json(nullptr)}});
    }
    Json cands = Json::array();
    for (const auto& c : candidates) {
        cands.push_back(Json{{"path_index", c.path_index},
                             {"failed", c.failed},
                             {"answer_text", c.answer_text},
                             {"normalized_answer", c.normalized_answer},
                             {"failure_reason", c.failure_reason}});
    }
    bool adjudicated = std::any_of(outcome.history.records.begin(), outcome.history.records.end(),
                                   [](const SelectionRecord& r) { return r.adjudication; });
    return Json{{"query_id", q.id},
                {"winner",
                 Json{{"path_index", outcome.winner.path_index},
                      {"answer_text", outcome.winner.answer_text},
                      {"normalized_answer", outcome.winner.normalized_answer}}},
                {"bypassed", outcome.bypassed},
                {"adjudication", adjudicated},
                {"fallback", outcome.fallback},
                {"chosen_set", outcome.history.chosen_set},
                {"records", rounds},
                {"candidates", cands}};
}

} // namespace rethinker
