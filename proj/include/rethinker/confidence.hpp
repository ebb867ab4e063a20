#pragma once
// Perplexity over generated-token log-probabilities, and the optional gate
// that decides whether another re-selection round runs.

#include "rethinker/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace rethinker {

struct PerplexityScore {
    double value = 1.0;           // exp(-mean logprob); >= 1
    std::size_t token_count = 0;  // T_seq; 0 only for the uninformative sentinel

    bool uninformative() const;
};

// Positive log-probabilities up to this are treated as rounding noise and
// clamped to zero; anything larger is rejected as malformed backend output.
inline constexpr double kLogprobTolerance = 1e-6;

// Throws std::invalid_argument for an empty list, NaN, or an entry above
// kLogprobTolerance.
PerplexityScore perplexity(std::span<const double> logprobs);
PerplexityScore perplexity(std::span<const TokenLogprob> logprobs);

// +inf score used when a backend returns no logprobs and the run opted in to
// treating that as maximal uncertainty. Always gates.
PerplexityScore uninformative_score();

// No threshold: always true (every configured round runs). Otherwise strict
// `value > threshold`.
bool gate_triggers_reselection(const PerplexityScore& score, std::optional<double> threshold);

} // namespace rethinker
