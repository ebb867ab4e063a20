// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include "rethinker/confidence.hpp"
#include "rethinker/curation.hpp"
#include "rethinker/evalkit.hpp"
#include "rethinker/judge.hpp"
#include "rethinker/latin_square.hpp"
#include "rethinker/reasoning.hpp"
#include "rethinker/selector.hpp"
#include "rethinker/text.hpp"

#include "support/harness.hpp"
#include "support/planted_corpus.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

using namespace rethinker;
using namespace rethinker::testing;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what)
    {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Check ac1_latin_squares()
{
    Check c;
    auto start = Clock::now();
    for (std::size_t n = 1; n <= 16; ++n) {
        auto sq = build_cyclic(n);
        c.expect(!validate(sq).has_value(), "build_cyclic(" + std::to_string(n) + ") invalid");
        // Position coverage over n rounds: candidate k sits at position p
        // exactly once.
        std::vector<std::vector<int>> counts(n, std::vector<int>(n, 0));
        for (std::size_t r = 0; r < n; ++r) {
            auto perm = row_for_round(sq, r);
            for (std::size_t p = 0; p < n; ++p) {
                ++counts[static_cast<std::size_t>(perm[p] - 1)][p];
            }
        }
        for (const auto& row : counts) {
            for (int v : row) {
                c.expect(v == 1, "coverage matrix not all-ones at n=" + std::to_string(n));
            }
        }
    }
    const std::vector<std::vector<int>> example{
        {1, 2, 3, 4, 5}, {2, 3, 4, 5, 1}, {3, 4, 5, 1, 2}, {4, 5, 1, 2, 3}, {5, 1, 2, 3, 4}};
    c.expect(build_cyclic(5).cells() == example, "n=5 square differs from the worked example");
    c.expect(seconds_since(start) < 1.0, "took longer than 1 s");
    if (c.ok) {
        c.detail = "n=1..16 valid, n=5 matches, coverage all-ones";
    }
    return c;
}

Check ac2_perplexity()
{
    using Big = boost::multiprecision::cpp_dec_float_50;
    Check c;
    double measured = 0.0;   // time spent in perplexity(), not in the oracle
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> len(1, 2000);
    std::uniform_real_distribution<double> lp(-12.0, 0.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> seq(static_cast<std::size_t>(len(rng)));
        for (auto& v : seq) {
            v = lp(rng);
        }
        Big sum = 0;
        for (double v : seq) {
            sum += Big(v);
        }
        Big oracle = boost::multiprecision::exp(-sum / Big(seq.size()));
        auto t0 = Clock::now();
        auto got = perplexity(std::span<const double>(seq)).value;
        measured += seconds_since(t0);
        auto rel = boost::multiprecision::abs((Big(got) - oracle) / oracle).convert_to<double>();
        worst = std::max(worst, rel);
    }
    c.expect(worst <= 1e-9, "relative error " + std::to_string(worst) + " > 1e-9");
    const std::vector<double> half{-std::log(2.0), -std::log(2.0)};
    auto two = perplexity(std::span<const double>(half)).value;
    c.expect(std::abs(two - 2.0) <= 1e-12, "[-ln2,-ln2] gave " + format_fixed(two, 15));
    c.expect(measured < 1.0, "scoring took " + format_fixed(measured, 3) + " s");
    if (c.ok) {
        std::ostringstream s;
        s << "1000 sequences in " << format_fixed(measured, 3) << " s, worst relative error " << worst;
        c.detail = s.str();
    }
    return c;
}

std::string summary_reply(int path)
{
    // Path 2's summary reports no extractable answer.
    return "Part 1: Reasoning Trajectory Summary\nThe solver of path " + std::to_string(path) +
           " computed the value.\n\nPart 2: Final Answer\n" +
           (path == 2 ? std::string("null") : "<answer>sol-" + std::to_string(path) + "-1</answer>") +
           "\n\nPart 3: Key Areas for Improvement\nRecheck carry step in path " + std::to_string(path) + ".";
}

Check ac3_multi_path()
{
    Check c;
    auto start = Clock::now();
    std::vector<MockRule> rules;
    for (int p = 1; p <= 3; ++p) {
        const auto ps = "[path=" + std::to_string(p) + "]";
        for (int t = 0; t < 2; ++t) {
            const auto ts = std::to_string(t);
            rules.push_back(rule(ps + "[stage=solver][round=" + ts + "]",
                                 "Working.\n<answer>sol-" + std::to_string(p) + "-" + ts + "</answer>"));
            rules.push_back(rule(ps + "[stage=critic][round=" + ts + "]",
                                 "Checked.\n<answer>crit-" + std::to_string(p) + "-" + ts + "</answer>"));
        }
        rules.push_back(rule(ps + "[stage=summary]", summary_reply(p)));
    }
    RunConfig config;
    config.n_parallel = 3;
    config.t_solver = 2;
    config.t_critic = 2;
    Harness h(script(rules), config);
    Query q{"q-alg1", "What is the value?", std::nullopt, std::nullopt};
    auto out = run_paths(q, *h.engine);

    c.expect(h.mock->call_count() == 3 * (2 + 1 + 2),
             "expected 15 generations, saw " + std::to_string(h.mock->call_count()));
    c.expect(out.paths.size() == 3, "not every path succeeded");
    for (int p = 1; p <= 3; ++p) {
        const auto ps = "[path=" + std::to_string(p) + "]";
        c.expect(h.calls_tagged(ps + "[stage=solver]") == 2, "path " + std::to_string(p) + ": solver rounds != 2");
        c.expect(h.calls_tagged(ps + "[stage=summary]") == 1, "path " + std::to_string(p) + ": summaries != 1");
        c.expect(h.calls_tagged(ps + "[stage=critic]") == 2, "path " + std::to_string(p) + ": critic rounds != 2");
    }
    for (const auto& ex : h.mock->request_log()) {
        for (int p = 1; p <= 3; ++p) {
            const auto ps = "[path=" + std::to_string(p) + "]";
            const auto pp = std::to_string(p);
            if (contains(ex.tag, ps + "[stage=solver][round=0]")) {
                c.expect(!contains(ex.subject, "Last round answer"), "solver round 0 carries a re-answer clause");
            }
            if (contains(ex.tag, ps + "[stage=solver][round=1]")) {
                c.expect(contains(ex.subject, "Last round answer is: sol-" + pp + "-0. Please re-answer it."),
                         "solver round 1 of path " + pp + " lacks the round-0 extract");
            }
            if (contains(ex.tag, ps + "[stage=critic][round=0]")) {
                c.expect(contains(ex.subject, "Recheck carry step in path " + pp + "."),
                         "critic prompt lacks the improvement areas");
                if (p == 2) {
                    c.expect(contains(ex.subject, "Part 2: Final Answer\nnull"),
                             "null summary answer not shown as null");
                }
            }
            if (contains(ex.tag, ps + "[stage=critic][round=1]")) {
                c.expect(contains(ex.subject, "Last round answer is: crit-" + pp + "-0. Please re-answer it."),
                         "critic round 1 of path " + pp + " lacks the round-0 extract");
            }
        }
    }
    for (const auto& path : out.paths) {
        c.expect(path.summary.final_answer.has_value() == (path.path_index != 2),
                 "summary null convention broken on path " + std::to_string(path.path_index));
        c.expect(path.final_candidate.answer_text == "crit-" + std::to_string(path.path_index) + "-1",
                 "final candidate is not the last critic answer");
    }
    c.expect(seconds_since(start) < 5.0, "took longer than 5 s");
    if (c.ok) {
        c.detail = "3 paths x (2 solver + 1 summary + 2 critic) = 15 calls, chaining and null verified";
    }
    return c;
}

// Selector script: per round r, the candidate named by pick(r) is chosen by
// its presented position under the cyclic square over n candidates.
MockScript selector_script(int n, int rounds, const std::function<int(int)>& pick,
                           std::optional<int> adjudication_choice)
{
    std::vector<MockRule> rules;
    for (int r = 0; r < rounds; ++r) {
        // Distinct perplexities so the history lines differ.
        std::vector<double> lps(4, -0.1 * (r + 1));
        rules.push_back(rule("[stage=selector][round=" + std::to_string(r) + "]",
                             select_text(cyclic_position(pick(r), r, n)), lps));
    }
    if (adjudication_choice) {
        rules.push_back(rule("[stage=selector][round=" + std::to_string(rounds) + "]", select_text(*adjudication_choice),
                             std::vector<double>{-0.05, -0.05}));
    }
    return script(rules);
}

Check ac4_selection()
{
    Check c;
    auto start = Clock::now();
    Query q{"q-alg2", "Pick the best.", std::nullopt, std::nullopt};

    // (a) unanimity: 5 rounds (R = 4) all choose path 2.
    {
        RunConfig config;
        config.r_selector = 4;
        Harness h(selector_script(3, 5, [](int) { return 2; }, std::nullopt), config);
        auto cands = make_candidates(3);
        auto out = select(q, cands, *h.engine);
        c.expect(h.mock->call_count() == 5, "(a) expected 5 selector calls, saw " +
                                                std::to_string(h.mock->call_count()));
        c.expect(h.calls_tagged("[round=5]") == 0, "(a) adjudication issued despite unanimity");
        c.expect(out.winner.path_index == 2 && !out.fallback, "(a) wrong winner");
    }

    // (b) disagreement: round 0 picks 1, later rounds pick 3.
    {
        RunConfig config;
        config.r_selector = 4;
        Harness h(selector_script(3, 5, [](int r) { return r == 0 ? 1 : 3; }, 2), config);
        auto cands = make_candidates(3);
        auto out = select(q, cands, *h.engine);
        c.expect(h.calls_tagged("[round=5]") == 1, "(b) expected exactly one adjudication call");
        c.expect(h.mock->call_count() == 6, "(b) expected 5 rounds + 1 adjudication");
        c.expect(out.history.chosen_set == std::set<int>{1, 3}, "(b) C_hist is not {1,3}");
        c.expect(out.history.chosen_set.count(out.winner.path_index) == 1, "(b) winner outside C_hist");
        c.expect(out.winner.path_index == 3, "(b) adjudication choice not honoured");
        // Adjudication presents C_hist in ascending order.
        for (const auto& ex : h.mock->request_log()) {
            if (contains(ex.tag, "[round=5]")) {
                c.expect(contains(ex.subject, "Response 1:\nReasoning for answer-1") &&
                             contains(ex.subject, "Response 2:\nReasoning for answer-3") &&
                             !contains(ex.subject, "answer-2</answer>"),
                         "(b) adjudication prompt does not list exactly C_hist in order");
            }
        }
    }

    // (c) position-1 bias over n rounds covers every candidate once.
    for (int n : {2, 3, 5, 7}) {
        RunConfig config;
        config.r_selector = n - 1;
        std::vector<MockRule> rules;
        rules.push_back(rule("[stage=selector]", select_text(1), std::vector<double>{-0.3, -0.2}));
        Harness h(script(rules), config);
        auto cands = make_candidates(n);
        auto out = select(q, cands, *h.engine);
        std::map<int, int> times;
        for (const auto& r : out.history.records) {
            if (!r.adjudication) {
                ++times[r.chosen];
            }
        }
        bool each_once = static_cast<int>(times.size()) == n;
        for (auto& [idx, k] : times) {
            each_once = each_once && k == 1;
        }
        c.expect(each_once, "(c) position-1 bias did not cover each of " + std::to_string(n) + " candidates once");
    }

    // (d) history line format.
    {
        RunConfig config;
        config.r_selector = 2;
        Harness h(selector_script(3, 3, [](int r) { return 1 + r; }, 1), config);
        auto cands = make_candidates(3);
        select(q, cands, *h.engine);
        static const std::regex line(R"(^Round \d+: Response \d+ \(entropy: \d+\.\d{4}\)$)");
        int history_lines = 0;
        for (const auto& ex : h.mock->request_log()) {
            std::istringstream in(ex.subject);
            for (std::string l; std::getline(in, l);) {
                if (starts_with_ci(l, "Round ") && contains(l, "entropy")) {
                    c.expect(std::regex_match(l, line), "(d) malformed history line: " + l);
                    ++history_lines;
                }
            }
        }
        // rounds 1, 2 and the adjudication carry 1, 2 and 3 lines.
        c.expect(history_lines == 6, "(d) expected 6 history lines, saw " + std::to_string(history_lines));
        c.expect(format_history({SelectionRecord{0, 3, 1.23456, "", {}, false, std::nullopt}}) ==
                     "Round 0: Response 3 (entropy: 1.2346)",
                 "(d) format_history output");
    }
    c.expect(seconds_since(start) < 5.0, "took longer than 5 s");
    if (c.ok) {
        c.detail = "unanimity 0 adjudications, disagreement 1, position bias covered, history format ok";
    }
    return c;
}

Check ac5_curation()
{
    Check c;
    auto start = Clock::now();
    auto corpus = planted_corpus();
    ExactMatchJudge judge;
    CurationConfig config;
    auto result = curate(corpus, config, judge);
    const auto& r = result.report;
    c.expect(result.dataset.size() == 70, "kept " + std::to_string(result.dataset.size()) + " != 70");
    c.expect(r.kept + r.rejected + r.quarantined == 100, "conservation violated");
    const std::vector<std::pair<std::string, std::size_t>> expected{
        {"correctness", 10}, {"format", 10}, {"dedup", 0}, {"rebalance", 0}, {"finalize", 10}};
    c.expect(r.stages.size() == expected.size(), "unexpected stage list");
    for (std::size_t i = 0; i < std::min(expected.size(), r.stages.size()); ++i) {
        c.expect(r.stages[i].name == expected[i].first, "stage " + std::to_string(i) + " is " + r.stages[i].name);
        c.expect(r.stages[i].rejected == expected[i].second,
                 r.stages[i].name + " rejected " + std::to_string(r.stages[i].rejected));
        c.expect(r.stages[i].input == r.stages[i].kept + r.stages[i].rejected + r.stages[i].quarantined,
                 r.stages[i].name + " does not conserve items");
    }
    for (std::size_t i = 0; i < r.dispositions.size(); ++i) {
        const auto defect = planted_defect(static_cast<int>(i));
        const auto& d = r.dispositions[i];
        const char* want = defect == Defect::none ? "kept" : "rejected";
        c.expect(d.outcome == want, d.id + " ended " + d.outcome);
    }
    c.expect(r.reject_reasons.count("wrong-answer") && r.reject_reasons.at("wrong-answer") == 10 &&
                 r.reject_reasons.count("answer-format") && r.reject_reasons.at("answer-format") == 10 &&
                 r.reject_reasons.count("failed-tool-call") && r.reject_reasons.at("failed-tool-call") == 10,
             "reject reasons do not match the planted defects");
    c.expect(seconds_since(start) < 10.0, "took longer than 10 s");
    if (c.ok) {
        c.detail = "70 kept; rejects 10/10/10 at correctness/format/finalize; 100 conserved";
    }
    return c;
}

Check ac6_toolbox()
{
    Check c;
    TempDir tmp;
    const auto trace_path = tmp / "trace.jsonl";
    RunConfig config;
    std::size_t tool_calls = 0;
    std::size_t model_calls = 0;
    {
        // Never answers: the loop stops after exactly max_agent_steps calls.
        std::vector<MockRule> rules{rule("[query=code][path=1][stage=solver][round=0][step=1]",
                                         "Let me check.\n<code>print(6*7)</code>"),
                                    rule("[query=code]", "It printed 42. <answer>42</answer>"),
                                    rule("[stage=solver]", "Still thinking about it.")};
        Harness h(script(rules), config, trace_path);
        AgentLoopOptions opts;
        opts.ctx = TraceContext{"never", 1, Stage::solver, 0};
        auto t = run_agent_loop({Message{Role::user, "Question?", std::nullopt}}, *h.gateway, *h.executor,
                                h.trace.get(), opts);
        c.expect(t.step_count == 50, "step_count " + std::to_string(t.step_count) + " != 50");
        c.expect(h.mock->call_count() == 50, "model calls " + std::to_string(h.mock->call_count()) + " != 50");
        c.expect(!t.final_answer.has_value(), "never-answering loop produced an answer");

        // print(1+1)
        TraceContext ctx{"exec", 1, Stage::solver, 0};
        std::vector<ToolInvocation> events;
        auto r = h.executor->execute("print(1+1)", 30.0, ctx, &events);
        c.expect(r.ok() && r.stdout_text == "2\n", "print(1+1) stdout was '" + r.stdout_text + "'");

        // 1-second timeout on an infinite loop.
        auto t0 = Clock::now();
        auto slow = h.executor->execute("while True:\n    pass\n", 1.0, ctx, &events);
        const double wall = seconds_since(t0);
        c.expect(slow.timed_out, "infinite loop not reported as timed out");
        c.expect(wall >= 1.0 && wall <= 3.0, "timeout wall clock " + format_fixed(wall, 2) + " s outside [1,3]");
        c.expect(events.size() == 2 && events[1].failed(), "timeout not recorded as a failed invocation");

        // A code step inside the loop: one more tool invocation.
        AgentLoopOptions code_opts;
        code_opts.ctx = TraceContext{"code", 1, Stage::solver, 0};
        auto ct = run_agent_loop({Message{Role::user, "Compute.", std::nullopt}}, *h.gateway, *h.executor,
                                 h.trace.get(), code_opts);
        c.expect(ct.tool_events.size() == 1 && ct.tool_events.front().output_text == "42\n" &&
                     ct.final_answer == "42",
                 "agent loop code step did not run");
        tool_calls = events.size() + ct.tool_events.size();
        model_calls = h.mock->call_count();
        h.trace->flush();
    }

    std::ifstream in(trace_path);
    std::size_t tool_lines = 0, model_lines = 0, lines = 0;
    std::set<std::uint64_t> seqs;
    std::set<std::string> tool_keys;
    bool duplicate_tool = false;
    for (std::string line; std::getline(in, line);) {
        ++lines;
        auto j = Json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            c.expect(false, "trace line " + std::to_string(lines) + " does not parse");
            continue;
        }
        seqs.insert(j.at("seq").get<std::uint64_t>());
        if (j.at("kind") == "tool") {
            ++tool_lines;
            auto key = j["query_id"].get<std::string>() + "|" + j["invocation"]["started_at"].get<std::string>() + "|" +
                       j["invocation"]["arguments"].dump();
            duplicate_tool = duplicate_tool || !tool_keys.insert(key).second;
        } else if (j.at("kind") == "model") {
            ++model_lines;
        }
    }
    c.expect(seqs.size() == lines, "duplicate sequence numbers in trace");
    c.expect(!duplicate_tool, "a tool invocation was traced twice");
    c.expect(tool_lines == tool_calls,
             "tool lines " + std::to_string(tool_lines) + " != invocations " + std::to_string(tool_calls));
    c.expect(model_lines == model_calls,
             "model lines " + std::to_string(model_lines) + " != calls " + std::to_string(model_calls));
    if (c.ok) {
        c.detail = "50-step stop, stdout \"2\", timeout honoured, " + std::to_string(lines) + " trace lines parsed";
    }
    return c;
}

Check ac7_ppl_guidance()
{
    Check c;
    auto start = Clock::now();
    auto informative = simulate_ppl_guidance(1000, 7);
    for (std::size_t r = 1; r < informative.with_ppl.size(); ++r) {
        c.expect(informative.with_ppl[r] >= informative.with_ppl[r - 1], "WITH-PPL curve decreases at round " +
                                                                            std::to_string(r));
    }
    c.expect(informative.with_ppl.back() > informative.without_ppl.back(), "WITH-PPL does not end above WITHOUT");
    c.expect(!informative.identical, "informative oracle reported identical curves");
    SimulationParams flat;
    flat.noise = 0.0;
    auto zero = simulate_ppl_guidance(1000, 7, flat);
    c.expect(zero.identical && zero.with_ppl == zero.without_ppl, "zero-noise curves differ");
    c.expect(seconds_since(start) < 30.0, "took longer than 30 s");
    if (c.ok) {
        std::ostringstream s;
        s << "with " << informative.with_ppl.front() << "->" << informative.with_ppl.back() << ", without "
          << informative.without_ppl.front() << "->" << informative.without_ppl.back() << "; zero noise identical";
        c.detail = s.str();
    }
    return c;
}

Check ac8_metric_laws()
{
    Check c;
    std::mt19937_64 rng(99);
    for (int set = 0; set < 200; ++set) {
        const int n = 1 + static_cast<int>(rng() % 6);
        const int queries = 1 + static_cast<int>(rng() % 40);
        std::vector<QueryOutcome> outcomes;
        for (int i = 0; i < queries; ++i) {
            std::vector<bool> cc(static_cast<std::size_t>(n));
            for (auto&& b : cc) {
                b = rng() % 2 == 0;
            }
            if (set % 4 == 0 && i % 3 == 0) {
                cc.assign(cc.size(), true);   // some all-correct queries
            }
            const int pick = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
            outcomes.push_back(make_outcome("q" + std::to_string(i), cc, cc[static_cast<std::size_t>(pick)]));
        }
        auto m = compute_metrics(outcomes);
        c.expect(m.pass_at_1 <= m.pass_at_n, "pass@1 > pass@N");
        std::size_t with_correct = 0;
        for (const auto& o : outcomes) {
            with_correct += o.k_correct >= 1 ? 1 : 0;
        }
        std::size_t hist_sum = 0;
        for (auto v : m.k_histogram) {
            hist_sum += v;
        }
        c.expect(hist_sum == with_correct, "k-histogram does not sum to queries with a correct candidate");
        if (static_cast<std::size_t>(n) < m.hit_by_k.size()) {
            const auto& full = m.hit_by_k[static_cast<std::size_t>(n)];
            c.expect(full.hits == full.total, "hit rate below 1 at k = N");
        }
        std::vector<QueryOutcome> all_correct;
        for (const auto& o : outcomes) {
            if (o.k_correct == n) {
                all_correct.push_back(o);
            }
        }
        if (!all_correct.empty()) {
            auto hr = hit_rate_conditional(all_correct);
            c.expect(hr && *hr == 1.0, "hit_rate_conditional != 1 over k_correct = N");
        }
    }
    if (c.ok) {
        c.detail = "200 random outcome sets";
    }
    return c;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_ac9_inputs(const fs::path& dir)
{
    std::ofstream(dir / "dataset.jsonl")
        << R"({"id": "alpha", "question": "What is 2+2?", "answer": "4", "category": "arith"})" "\n"
        << R"({"id": "beta", "question": "Name the largest planet.", "answer": "Jupiter", "category": "astro"})" "\n"
        << R"({"id": "gamma", "question": "What is 10/4?", "answer": "2.5", "category": "arith"})" "\n";
    std::ofstream(dir / "config.json") << R"({"n_parallel": 3, "t_solver": 2, "t_critic": 1, "r_selector": 2,
                                           "query_workers": 2, "max_agent_steps": 6})";
    // First match wins, so specific rules come first.
    std::ofstream s(dir / "script.jsonl");
    for (const auto& [q, ans] : std::vector<std::pair<std::string, std::string>>{
             {"alpha", "4"}, {"beta", "Jupiter"}, {"gamma", "2.5"}}) {
        Json row{{"match", "[query=" + q + "][path=1][stage=summary]"},
                 {"text", "Part 1: Reasoning Trajectory Summary\nComputed directly.\n\nPart 2: Final Answer\n"
                          "<answer>" + ans + "</answer>\n\nPart 3: Key Areas for Improvement\nNone noted."}};
        for (int p = 1; p <= 3; ++p) {
            row["match"] = "[query=" + q + "][path=" + std::to_string(p) + "][stage=summary]";
            s << row.dump() << "\n";
        }
    }
    // alpha path 1 uses the code tool on its first solver step.
    s << R"({"match": "[query=alpha][path=1][stage=solver][round=0][step=1]", "text": "<code>print(2+2)</code>"})" "\n"
      << R"({"match": "[query=alpha][path=1][stage=solver][round=0][step=2]", "text": "The code printed 4. <answer>\\boxed{4}</answer>"})" "\n"
      << R"({"match": "[query=alpha][path=3][stage=critic]", "text": "Rechecked: <answer>5</answer>"})" "\n"
      << R"({"match": "[query=alpha][path=", "text": "Simple sum. <answer>4</answer>"})" "\n"
      << R"({"match": "[query=beta][path=2]", "text": "Probably <answer>Saturn</answer>"})" "\n"
      << R"({"match": "[query=beta][path=", "text": "The gas giant. <answer>Jupiter</answer>"})" "\n"
      << R"({"match": "[query=gamma][path=", "text": "Divide. <answer>2.5</answer>"})" "\n"
      << R"({"match": "[query=alpha][stage=selector]", "text": "FINAL DECISION: <select>Response 1</select>", "logprobs": [-0.2, -0.4, -0.1]})" "\n"
      << R"({"match": "[query=beta][stage=selector]", "text": "Jupiter is right. FINAL DECISION: <select>Response 2</select>", "logprobs": [-0.3, -0.3]})" "\n"
      << R"({"match": "[query=gamma][stage=selector]", "text": "All agree. FINAL DECISION: <select>Response 3</select>", "logprobs": [-0.05]})" "\n";
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(RETHINKER_CLI) + " --log-level warn " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Check ac9_determinism()
{
    Check c;
    auto start = Clock::now();
    TempDir tmp;
    write_ac9_inputs(tmp.path());
    const auto common = " --dataset " + (tmp / "dataset.jsonl").string() + " --config " +
                        (tmp / "config.json").string() + " --mock-script " + (tmp / "script.jsonl").string();
    const int rc1 = run_cli("run" + common + " --out " + (tmp / "run1").string());
    const int rc2 = run_cli("run" + common + " --out " + (tmp / "run2").string());
    c.expect(rc1 == 0 && rc2 == 0, "run exited " + std::to_string(rc1) + "/" + std::to_string(rc2));
    for (const char* id : {"alpha", "beta", "gamma"}) {
        const auto rel = fs::path("runs") / id / "selection.json";
        c.expect(fs::exists(tmp / "run1" / rel), std::string("missing selection report for ") + id);
        c.expect(slurp(tmp / "run1" / rel) == slurp(tmp / "run2" / rel),
                 std::string("selection report differs for ") + id);
    }
    c.expect(fs::exists(tmp / "run1" / "metrics.json"), "metrics.json missing");
    c.expect(slurp(tmp / "run1" / "metrics.json") == slurp(tmp / "run2" / "metrics.json"), "metrics differ");
    c.expect(slurp(tmp / "run1" / "metrics.txt") == slurp(tmp / "run2" / "metrics.txt"), "metrics table differs");
    const double wall = seconds_since(start);
    c.expect(wall < 30.0, "took " + format_fixed(wall, 1) + " s");
    if (c.ok) {
        c.detail = "2 runs x 3 queries byte-identical in " + format_fixed(wall, 1) + " s";
    }
    return c;
}

} // namespace

int main()
{
    spdlog::set_level(spdlog::level::err);
    const std::vector<std::pair<const char*, std::function<Check()>>> criteria{
        {"AC1", ac1_latin_squares}, {"AC2", ac2_perplexity},   {"AC3", ac3_multi_path},
        {"AC4", ac4_selection},     {"AC5", ac5_curation},     {"AC6", ac6_toolbox},
        {"AC7", ac7_ppl_guidance},  {"AC8", ac8_metric_laws},  {"AC9", ac9_determinism},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Check c;
        try {
            c = fn();
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail = std::string("exception: ") + e.what();
        }
        failures += c.ok ? 0 : 1;
        std::printf("ACCEPTANCE %s: %s (%s)\n", name, c.ok ? "PASS" : "FAIL", c.detail.c_str());
        std::fflush(stdout);
    }
    return failures ? 1 : 0;
}
