#include "rethinker/evalkit.hpp"

#include "rethinker/text.hpp"

#include "parallel.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rethinker {

QueryOutcome make_outcome(std::string query_id, std::vector<bool> candidate_correct, bool selector_correct,
                          std::optional<std::string> category)
{
    QueryOutcome o;
    o.query_id = std::move(query_id);
    o.category = std::move(category);
    o.k_correct = static_cast<int>(std::count(candidate_correct.begin(), candidate_correct.end(), true));
    o.candidate_correct = std::move(candidate_correct);
    o.selector_correct = selector_correct;
    if (o.selector_correct && o.k_correct == 0) {
        throw std::invalid_argument("query " + o.query_id + ": selector correct but no candidate is");
    }
    return o;
}

namespace {

void require_nonempty(const std::vector<QueryOutcome>& outcomes)
{
    if (outcomes.empty()) {
        throw std::invalid_argument("metrics need at least one query outcome");
    }
}

double fraction(std::size_t num, std::size_t den)
{
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

double pass_at_n(const std::vector<QueryOutcome>& outcomes)
{
    require_nonempty(outcomes);
    return fraction(std::count_if(outcomes.begin(), outcomes.end(), [](auto& o) { return o.k_correct >= 1; }),
                    outcomes.size());
}

double pass_at_1(const std::vector<QueryOutcome>& outcomes)
{
    require_nonempty(outcomes);
    return fraction(std::count_if(outcomes.begin(), outcomes.end(), [](auto& o) { return o.selector_correct; }),
                    outcomes.size());
}

std::optional<double> hit_rate_conditional(const std::vector<QueryOutcome>& outcomes)
{
    require_nonempty(outcomes);
    std::size_t hits = 0, total = 0;
    for (const auto& o : outcomes) {
        if (o.k_correct >= 1) {
            ++total;
            hits += o.selector_correct ? 1 : 0;
        }
    }
    if (total == 0) {
        return std::nullopt;
    }
    return fraction(hits, total);
}

std::vector<std::size_t> k_histogram(const std::vector<QueryOutcome>& outcomes, int n)
{
    std::vector<std::size_t> h(static_cast<std::size_t>(std::max(n, 0)) + 1, 0);
    for (const auto& o : outcomes) {
        if (o.k_correct < 0 || o.k_correct > n) {
            throw std::invalid_argument("query " + o.query_id + ": k_correct outside 0.." + std::to_string(n));
        }
        if (o.k_correct >= 1) {
            ++h[static_cast<std::size_t>(o.k_correct)];
        }
    }
    return h;
}

EvalMetrics compute_metrics(const std::vector<QueryOutcome>& outcomes)
{
    require_nonempty(outcomes);
    EvalMetrics m;
    m.queries = outcomes.size();
    for (const auto& o : outcomes) {
        m.n = std::max(m.n, static_cast<int>(o.candidate_correct.size()));
        m.n = std::max(m.n, o.k_correct);
    }
    m.pass_at_n = pass_at_n(outcomes);
    m.pass_at_1 = pass_at_1(outcomes);
    m.coverage = m.pass_at_n;
    m.hit_rate_conditional = hit_rate_conditional(outcomes);
    m.k_histogram = k_histogram(outcomes, m.n);
    m.hit_by_k.assign(m.k_histogram.size(), HitCell{});
    for (const auto& o : outcomes) {
        if (o.k_correct >= 1) {
            auto& cell = m.hit_by_k[static_cast<std::size_t>(o.k_correct)];
            ++cell.total;
            ++m.hit.total;
            if (o.selector_correct) {
                ++cell.hits;
                ++m.hit.hits;
            }
        }
    }
    return m;
}

EvalReport build_eval_report(const std::vector<QueryOutcome>& outcomes, std::size_t unjudged)
{
    EvalReport r;
    r.overall = compute_metrics(outcomes);
    r.unjudged = unjudged;
    std::map<std::string, std::vector<QueryOutcome>> groups;
    for (const auto& o : outcomes) {
        if (o.category) {
            groups[*o.category].push_back(o);
        }
    }
    for (const auto& [cat, group] : groups) {
        r.by_category[cat] = compute_metrics(group);
    }
    return r;
}

namespace {

Json metrics_json(const EvalMetrics& m)
{
    Json hist = Json::object();
    Json by_k = Json::object();
    for (std::size_t k = 1; k < m.k_histogram.size(); ++k) {
        hist[std::to_string(k)] = m.k_histogram[k];
        const auto& cell = m.hit_by_k[k];
        by_k[std::to_string(k)] = Json{{"hits", cell.hits},
                                       {"total", cell.total},
                                       {"rate", cell.total ? Json(fraction(cell.hits, cell.total)) : Json(nullptr)}};
    }
    return Json{{"queries", m.queries},
                {"n", m.n},
                {"pass_at_n", m.pass_at_n},
                {"pass_at_1", m.pass_at_1},
                {"coverage", m.coverage},
                {"hit_rate_conditional", m.hit_rate_conditional ? Json(*m.hit_rate_conditional) : Json(nullptr)},
                {"hits", m.hit.hits},
                {"hit_denominator", m.hit.total},
                {"k_histogram", hist},
                {"hit_by_k", by_k}};
}

std::string rate_or_dash(const std::optional<double>& v)
{
    return v ? format_fixed(*v, 2) : std::string("-");
}

void append_table(std::ostringstream& out, const std::string& title, const EvalMetrics& m)
{
    out << title << "\n";
    out << "  queries " << m.queries << "  pass@" << m.n << " " << format_fixed(m.pass_at_n, 4) << "  pass@1 "
        << format_fixed(m.pass_at_1, 4) << "  hit_rate " << rate_or_dash(m.hit_rate_conditional) << " ("
        << m.hit.hits << "/" << m.hit.total << ")\n";
    out << "  k  questions  hits  hit_rate\n";
    for (std::size_t k = 1; k < m.k_histogram.size(); ++k) {
        const auto& cell = m.hit_by_k[k];
        std::optional<double> rate;
        if (cell.total) {
            rate = fraction(cell.hits, cell.total);
        }
        char line[96];
        std::snprintf(line, sizeof line, "  %-2zu %10zu %5zu  %8s\n", k, m.k_histogram[k], cell.hits,
                      rate_or_dash(rate).c_str());
        out << line;
    }
}

} // namespace

Json eval_report_json(const EvalReport& report)
{
    Json cats = Json::object();
    for (const auto& [cat, m] : report.by_category) {
        cats[cat] = metrics_json(m);
    }
    return Json{{"overall", metrics_json(report.overall)}, {"categories", cats}, {"unjudged", report.unjudged}};
}

std::string eval_report_table(const EvalReport& report)
{
    std::ostringstream out;
    append_table(out, "overall", report.overall);
    for (const auto& [cat, m] : report.by_category) {
        append_table(out, "category " + cat, m);
    }
    if (report.unjudged) {
        out << "unjudged (excluded): " << report.unjudged << "\n";
    }
    return out.str();
}

std::optional<QueryOutcome> judge_query(const Query& q, const std::vector<CandidateAnswer>& candidates,
                                        int winner_path_index, Judge& judge, int max_in_flight)
{
    if (!q.gold_answer) {
        return std::nullopt;
    }
    std::vector<std::optional<bool>> verdicts(candidates.size());
    detail::parallel_for(candidates.size(), max_in_flight, [&](std::size_t i) {
        const auto& c = candidates[i];
        if (c.failed) {
            verdicts[i] = false;
            return;
        }
        try {
            verdicts[i] = judge.correct(q.text, c.answer_text, *q.gold_answer,
                                        q.id + "#path" + std::to_string(c.path_index));
        } catch (const std::exception& e) {
            spdlog::warn("query {}: judging path {}: {}", q.id, c.path_index, e.what());
        }
    });
    std::vector<bool> correct;
    std::optional<bool> selector;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!verdicts[i]) {
            return std::nullopt;
        }
        correct.push_back(*verdicts[i]);
        if (candidates[i].path_index == winner_path_index) {
            selector = *verdicts[i];
        }
    }
    if (!selector) {
        return std::nullopt;
    }
    return make_outcome(q.id, std::move(correct), *selector, q.category);
}

namespace {

class Stream {
public:
    explicit Stream(std::uint64_t seed) : rng_(seed) {}

    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double exponential() { return -std::log1p(-uniform()); }
    int index(int n) { return std::min(n - 1, static_cast<int>(uniform() * n)); }

private:
    std::mt19937_64 rng_;
};

} // namespace

SimulationReport simulate_ppl_guidance(std::size_t trials, std::uint64_t seed, const SimulationParams& p)
{
    if (trials < 1) {
        throw std::invalid_argument("simulate: trials must be >= 1");
    }
    if (p.rounds < 0 || p.candidates < 2 || !(p.noise >= 0.0) || !(p.distractor_bias >= 0.0 && p.distractor_bias <= 1.0)) {
        throw std::invalid_argument("simulate: need rounds >= 0, candidates >= 2, noise >= 0, bias in [0,1]");
    }
    SimulationReport rep;
    rep.trials = trials;
    rep.seed = seed;
    rep.params = p;
    const auto rounds = static_cast<std::size_t>(p.rounds) + 1;
    rep.with_ppl.assign(rounds, 0);
    rep.without_ppl.assign(rounds, 0);

    // Candidate 0 is correct; wrong candidates are 1..n-1.
    Stream s(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const int distractor = 1 + s.index(p.candidates - 1);
        std::vector<int> picks;
        std::vector<double> ppls;
        std::vector<int> votes(static_cast<std::size_t>(p.candidates), 0);
        std::size_t best = 0;
        for (std::size_t r = 0; r < rounds; ++r) {
            // Four draws per round whatever the outcome, so streams line up
            // across parameter settings.
            const double ppl = 1.0 + s.exponential();
            const double u_correct = s.uniform();
            const double u_bias = s.uniform();
            const int uniform_wrong = 1 + s.index(p.candidates - 1);
            int pick = 0;
            if (u_correct >= std::exp(-p.noise * (ppl - 1.0))) {
                pick = u_bias < p.distractor_bias ? distractor : uniform_wrong;
            }
            picks.push_back(pick);
            ppls.push_back(ppl);
            ++votes[static_cast<std::size_t>(pick)];
            if (ppl < ppls[best]) {
                best = r;
            }
            if (picks[best] == 0) {
                ++rep.with_ppl[r];
            }
            // Plurality; ties go to the most recent pick among the leaders.
            const int top = *std::max_element(votes.begin(), votes.end());
            int plural = pick;
            for (std::size_t i = r + 1; i-- > 0;) {
                if (votes[static_cast<std::size_t>(picks[i])] == top) {
                    plural = picks[i];
                    break;
                }
            }
            if (plural == 0) {
                ++rep.without_ppl[r];
            }
        }
    }
    rep.identical = rep.with_ppl == rep.without_ppl;
    return rep;
}

Json simulation_report_json(const SimulationReport& r)
{
    return Json{{"trials", r.trials},
                {"seed", r.seed},
                {"params",
                 Json{{"rounds", r.params.rounds},
                      {"candidates", r.params.candidates},
                      {"noise", r.params.noise},
                      {"distractor_bias", r.params.distractor_bias}}},
                {"with_ppl", r.with_ppl},
                {"without_ppl", r.without_ppl},
                {"identical", r.identical}};
}

std::string simulation_report_table(const SimulationReport& r)
{
    std::ostringstream out;
    out << "trials " << r.trials << "  seed " << r.seed << "  noise " << format_fixed(r.params.noise, 2) << "\n";
    out << "round  with_ppl  without_ppl\n";
    for (std::size_t i = 0; i < r.with_ppl.size(); ++i) {
        char line[64];
        std::snprintf(line, sizeof line, "%5zu  %8zu  %11zu\n", i, r.with_ppl[i], r.without_ppl[i]);
        out << line;
    }
    if (r.identical) {
        out << "curves identical\n";
    }
    return out.str();
}

} // namespace rethinker
