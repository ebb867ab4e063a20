#include "rethinker/confidence.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rethinker {

bool PerplexityScore::uninformative() const { return std::isinf(value); }

PerplexityScore perplexity(std::span<const double> logprobs)
{
    if (logprobs.empty()) {
        throw std::invalid_argument("perplexity of an empty sequence");
    }
    // Neumaier-compensated sum keeps long sequences accurate.
    double sum = 0.0;
    double compensation = 0.0;
    std::size_t clamped = 0;
    for (double lp : logprobs) {
        if (std::isnan(lp)) {
            throw std::invalid_argument("NaN log-probability");
        }
        if (lp > 0.0) {
            if (lp > kLogprobTolerance) {
                throw std::invalid_argument("positive log-probability " + std::to_string(lp));
            }
            ++clamped;
            lp = 0.0;
        }
        double t = sum + lp;
        if (std::fabs(sum) >= std::fabs(lp)) {
            compensation += (sum - t) + lp;
        } else {
            compensation += (lp - t) + sum;
        }
        sum = t;
    }
    if (clamped) {
        spdlog::warn("perplexity: clamped {} slightly positive log-probabilities to 0", clamped);
    }
    const double n = static_cast<double>(logprobs.size());
    double value = std::exp(-(sum + compensation) / n);
    return PerplexityScore{value, logprobs.size()};
}

PerplexityScore perplexity(std::span<const TokenLogprob> logprobs)
{
    std::vector<double> values;
    values.reserve(logprobs.size());
    for (const auto& t : logprobs) {
        values.push_back(t.logprob);
    }
    return perplexity(values);
}

PerplexityScore uninformative_score()
{
    return PerplexityScore{std::numeric_limits<double>::infinity(), 0};
}

bool gate_triggers_reselection(const PerplexityScore& score, std::optional<double> threshold)
{
    if (!threshold) {
        return true;
    }
    return score.value > *threshold;
}

} // namespace rethinker
