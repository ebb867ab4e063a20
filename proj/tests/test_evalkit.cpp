#include "rethinker/evalkit.hpp"

#include "support/harness.hpp"

#include <gtest/gtest.h>

using namespace rethinker;
using namespace rethinker::testing;

namespace {

std::vector<QueryOutcome> sample_outcomes()
{
    return {
        make_outcome("a", {true, true, false}, true, std::string("x")),
        make_outcome("b", {false, true, false}, false, std::string("x")),
        make_outcome("c", {false, false, false}, false, std::string("y")),
        make_outcome("d", {true, true, true}, true, std::string("y")),
    };
}

} // namespace

TEST(Evalkit, Metrics)
{
    auto o = sample_outcomes();
    EXPECT_DOUBLE_EQ(pass_at_n(o), 0.75);
    EXPECT_DOUBLE_EQ(pass_at_1(o), 0.5);
    ASSERT_TRUE(hit_rate_conditional(o));
    EXPECT_DOUBLE_EQ(*hit_rate_conditional(o), 2.0 / 3.0);
    EXPECT_EQ(k_histogram(o, 3), (std::vector<std::size_t>{0, 1, 1, 1}));

    auto m = compute_metrics(o);
    EXPECT_EQ(m.n, 3);
    EXPECT_EQ(m.queries, 4u);
    EXPECT_EQ(m.hit_by_k[2].total, 1u);
    EXPECT_EQ(m.hit_by_k[2].hits, 1u);
    EXPECT_EQ(m.hit_by_k[1].hits, 0u);
    EXPECT_LE(m.pass_at_1, m.pass_at_n);
}

TEST(Evalkit, EdgeCases)
{
    EXPECT_FALSE(hit_rate_conditional({make_outcome("z", {false, false}, false)}));
    EXPECT_THROW(make_outcome("bad", {false, false}, true), std::invalid_argument);
    EXPECT_THROW(compute_metrics({}), std::invalid_argument);
}

TEST(Evalkit, ReportByCategory)
{
    auto report = build_eval_report(sample_outcomes(), 2);
    EXPECT_EQ(report.unjudged, 2u);
    ASSERT_EQ(report.by_category.size(), 2u);
    EXPECT_DOUBLE_EQ(report.by_category.at("y").pass_at_n, 0.5);
    auto j = eval_report_json(report);
    EXPECT_EQ(j["unjudged"], 2);
    EXPECT_TRUE(j.contains("overall"));
    EXPECT_NE(eval_report_table(report).find("category y"), std::string::npos);
}

TEST(Evalkit, JudgeQuery)
{
    ExactMatchJudge judge;
    Query q{"q", "Q", std::string("answer-2"), std::nullopt};
    auto cands = make_candidates(3);
    cands[2].failed = true;
    auto o = judge_query(q, cands, 2, judge);
    ASSERT_TRUE(o);
    EXPECT_EQ(o->candidate_correct, (std::vector<bool>{false, true, false}));
    EXPECT_TRUE(o->selector_correct);
    EXPECT_EQ(o->k_correct, 1);
    EXPECT_FALSE(judge_query(q, cands, 9, judge));
    q.gold_answer.reset();
    EXPECT_FALSE(judge_query(q, cands, 2, judge));
}

TEST(Evalkit, SimulationIsDeterministicAndGuided)
{
    auto a = simulate_ppl_guidance(500, 11);
    auto b = simulate_ppl_guidance(500, 11);
    EXPECT_EQ(a.with_ppl, b.with_ppl);
    EXPECT_EQ(a.without_ppl, b.without_ppl);
    ASSERT_EQ(a.with_ppl.size(), 5u);
    EXPECT_EQ(a.with_ppl[0], a.without_ppl[0]);
    EXPECT_GT(a.with_ppl.back(), a.without_ppl.back());
    for (std::size_t r = 1; r < a.with_ppl.size(); ++r) {
        EXPECT_GE(a.with_ppl[r], a.with_ppl[r - 1]);
    }
    SimulationParams clean;
    clean.noise = 0.0;
    auto c = simulate_ppl_guidance(200, 3, clean);
    EXPECT_TRUE(c.identical);
    EXPECT_EQ(c.with_ppl.back(), 200u);
    EXPECT_NE(simulation_report_table(a).find("with"), std::string::npos);
    EXPECT_EQ(simulation_report_json(a)["trials"], 500);
}
