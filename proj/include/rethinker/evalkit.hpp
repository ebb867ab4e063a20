#pragma once
// Evaluation metrics over judged candidate sets, plus a synthetic study of
// perplexity-guided re-selection.
//
// pass@N is the empirical at-least-one-correct rate over the generated paths
// (not the unbiased combinatorial estimator). Two hit-rate readings are
// reported: hit_rate_conditional (selector correct given >= 1 correct
// candidate) and coverage (= pass@N).

#include "rethinker/judge.hpp"
#include "rethinker/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rethinker {

struct QueryOutcome {
    std::string query_id;
    std::optional<std::string> category;
    std::vector<bool> candidate_correct;   // one entry per path
    bool selector_correct = false;
    int k_correct = 0;
};

// Fills k_correct; throws std::invalid_argument when selector_correct is set
// with no correct candidate.
QueryOutcome make_outcome(std::string query_id, std::vector<bool> candidate_correct, bool selector_correct,
                          std::optional<std::string> category = std::nullopt);

struct HitCell {
    std::size_t hits = 0;
    std::size_t total = 0;
};

struct EvalMetrics {
    std::size_t queries = 0;
    int n = 0;                                     // candidates per query (max seen)
    double pass_at_n = 0.0;
    double pass_at_1 = 0.0;
    double coverage = 0.0;
    std::optional<double> hit_rate_conditional;    // undefined without any correct candidate
    HitCell hit;
    std::vector<std::size_t> k_histogram;          // [k] for k = 1..n; index 0 unused
    std::vector<HitCell> hit_by_k;                 // same indexing
};

// All throw std::invalid_argument on empty input.
double pass_at_n(const std::vector<QueryOutcome>& outcomes);
double pass_at_1(const std::vector<QueryOutcome>& outcomes);
std::optional<double> hit_rate_conditional(const std::vector<QueryOutcome>& outcomes);
// Counts of queries by k_correct for k = 1..n (index 0 unused, always 0).
std::vector<std::size_t> k_histogram(const std::vector<QueryOutcome>& outcomes, int n);

EvalMetrics compute_metrics(const std::vector<QueryOutcome>& outcomes);

struct EvalReport {
    EvalMetrics overall;
    std::map<std::string, EvalMetrics> by_category;
    std::size_t unjudged = 0;                      // queries excluded for lack of a verdict
};

EvalReport build_eval_report(const std::vector<QueryOutcome>& outcomes, std::size_t unjudged = 0);
Json eval_report_json(const EvalReport& report);
std::string eval_report_table(const EvalReport& report);

// Judges each candidate answer (bounded fan-out). The selector verdict is the
// winner's candidate verdict. nullopt when any verdict is missing, when the
// query has no gold, or when the winner's answer is not among the
// candidates.
std::optional<QueryOutcome> judge_query(const Query& q, const std::vector<CandidateAnswer>& candidates,
                                        int winner_path_index, Judge& judge, int max_in_flight = 4);

// Synthetic re-selection study. Each trial has `candidates` answers, one of
// them correct and one a persistent distractor. Every round draws a pseudo
// perplexity 1 + Exp(1); the round's pick is correct with probability
// exp(-noise * (ppl - 1)), otherwise it goes to the distractor with
// probability distractor_bias and to a uniform wrong answer otherwise.
// After each round 0..rounds two policies name an answer from the history:
//   with_ppl     the pick of the lowest-perplexity round (earliest on ties)
//   without_ppl  the most frequent pick (most recent on ties)
// Both see the same draws.
struct SimulationParams {
    int rounds = 4;
    int candidates = 5;
    double noise = 1.0;
    double distractor_bias = 0.7;
};

struct SimulationReport {
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    SimulationParams params;
    std::vector<std::size_t> with_ppl;     // correct count after round r
    std::vector<std::size_t> without_ppl;
    bool identical = false;
};

// Throws std::invalid_argument for trials < 1, rounds < 0, candidates < 2,
// noise < 0 or a bias outside [0,1].
SimulationReport simulate_ppl_guidance(std::size_t trials, std::uint64_t seed, const SimulationParams& params = {});
Json simulation_report_json(const SimulationReport& report);
std::string simulation_report_table(const SimulationReport& report);

} // namespace rethinker
