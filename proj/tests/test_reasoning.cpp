#include "rethinker/errors.hpp"
#include "rethinker/reasoning.hpp"

#include "support/harness.hpp"

#include <gtest/gtest.h>

using namespace rethinker;
using namespace rethinker::testing;

namespace {

const std::string kSummary = "Part 1: Reasoning Trajectory Summary\nTried a direct computation.\n\n"
                             "Part 2: Final Answer\n5\n\n"
                             "Part 3: Key Areas for Improvement\nDouble-check the arithmetic.";

Query query()
{
    return Query{"q", "What is 2+3?", std::string("5"), std::nullopt};
}

Trajectory answer_trajectory(std::vector<std::string> assistant)
{
    Trajectory t;
    t.messages.push_back(Message{Role::user, "Q", std::nullopt});
    for (auto& a : assistant) {
        t.messages.push_back(Message{Role::assistant, a, std::nullopt});
        t.messages.push_back(Message{Role::user, "feedback", std::nullopt});
    }
    t.messages.pop_back();
    return t;
}

} // namespace

TEST(ExtractAnswer, LastRegionOfFinalMessage)
{
    EXPECT_EQ(extract_answer(answer_trajectory({"<answer>1</answer>", "<answer>2</answer> <answer>3</answer>"})), "3");
    EXPECT_EQ(extract_answer(answer_trajectory({"<answer>1</answer>", "no tag"})), "1");
    EXPECT_EQ(extract_answer(answer_trajectory({"none", "none"})), std::nullopt);
}

TEST(GuidedSummary, ParsesSections)
{
    auto s = parse_guided_summary(kSummary);
    ASSERT_TRUE(s);
    EXPECT_EQ(s->final_answer, "5");
    EXPECT_NE(s->trajectory_summary.find("direct computation"), std::string::npos);
    EXPECT_NE(s->improvement_areas.find("arithmetic"), std::string::npos);

    auto null_answer = parse_guided_summary("Part 1: Reasoning Trajectory Summary\nx\nPart 2: Final Answer\nnull\n"
                                            "Part 3: Key Areas for Improvement\ny");
    ASSERT_TRUE(null_answer);
    EXPECT_FALSE(null_answer->final_answer);

    EXPECT_FALSE(parse_guided_summary("Part 1: Reasoning Trajectory Summary\nx\nPart 2: Final Answer\n5"));
}

TEST(GuidedSummary, CriticRendering)
{
    GuidedSummary s{"sum", std::nullopt, "areas"};
    EXPECT_EQ(render_summary_for_critic(s), "Part 1: Reasoning Trajectory Summary\nsum\n\nPart 2: Final Answer\nnull"
                                            "\n\nPart 3: Key Areas for Improvement\nareas");
}

TEST(Reasoning, PathCarriesOnlyLastAnswer)
{
    RunConfig config;
    config.t_solver = 2;
    config.t_critic = 2;
    Harness h(script({rule("[stage=summary]", kSummary),
                      rule("[stage=solver][round=0]", "First try <answer>4</answer>"),
                      rule("[stage=solver][round=1]", "Fixed <answer>5</answer>"),
                      rule("[stage=critic]", "Verified <answer>5</answer>")}),
              config);
    auto r = run_path(query(), 1, *h.engine);
    ASSERT_EQ(r.solver_rounds.size(), 2u);
    ASSERT_EQ(r.critic_rounds.size(), 2u);
    EXPECT_EQ(r.final_candidate.answer_text, "5");
    EXPECT_FALSE(r.final_candidate.failed);

    // Round 1 starts from a fresh context that only carries the last answer.
    const auto& second = r.solver_rounds[1].messages;
    ASSERT_GE(second.size(), 2u);
    EXPECT_NE(second[0].content.find("Last round answer is: 4. Please re-answer it."), std::string::npos);
    EXPECT_EQ(second[0].content.find("First try"), std::string::npos);

    const auto& critic0 = r.critic_rounds[0].messages[0].content;
    EXPECT_NE(critic0.find("Part 2: Final Answer\n5"), std::string::npos);
    EXPECT_EQ(critic0.find("Last round answer is"), std::string::npos);
    EXPECT_NE(r.critic_rounds[1].messages[0].content.find("Last round answer is: 5."), std::string::npos);

    EXPECT_EQ(h.calls_tagged("[stage=summary]"), 1u);
    EXPECT_EQ(h.calls_tagged("[stage=solver]"), 2u);
    EXPECT_EQ(h.calls_tagged("[stage=critic]"), 2u);
}

TEST(Reasoning, SummaryRepromptsOnce)
{
    RunConfig config;
    config.t_solver = 1;
    config.t_critic = 1;
    Harness h(script({rule("[stage=summary][round=0][attempt=0]", "unstructured"),
                      rule("[stage=summary]", kSummary), rule("*", "<answer>5</answer>")}),
              config);
    auto r = run_path(query(), 1, *h.engine);
    EXPECT_EQ(h.calls_tagged("[stage=summary]"), 2u);
    EXPECT_EQ(r.summary.final_answer, "5");

    Harness never(script({rule("[stage=summary]", "unstructured"), rule("*", "<answer>5</answer>")}), config);
    EXPECT_THROW(run_path(query(), 1, *never.engine), Error);
}

TEST(Reasoning, FailedPathIsFlagged)
{
    RunConfig config;
    config.n_parallel = 3;
    config.t_solver = 1;
    config.t_critic = 1;
    config.max_agent_steps = 2;
    Harness h(script({rule("[path=2][stage=critic]", "still thinking"), rule("[stage=summary]", kSummary),
                      rule("*", "<answer>5</answer>")}),
              config);
    auto out = run_paths(query(), *h.engine);
    ASSERT_EQ(out.candidates.size(), 3u);
    EXPECT_EQ(out.paths.size(), 2u);
    EXPECT_FALSE(out.candidates[0].failed);
    EXPECT_TRUE(out.candidates[1].failed);
    EXPECT_FALSE(out.candidates[1].failure_reason.empty());
    EXPECT_EQ(out.candidates[1].path_index, 2);
    EXPECT_FALSE(out.candidates[2].failed);
}

TEST(Reasoning, PathBundleLayout)
{
    RunConfig config;
    config.n_parallel = 2;
    config.t_solver = 2;
    config.t_critic = 1;
    Harness h(script({rule("[stage=summary]", kSummary), rule("*", "<answer>5</answer>")}), config);
    auto out = run_paths(query(), *h.engine);
    TempDir tmp;
    write_path_bundle(tmp.path(), out);
    for (int p = 1; p <= 2; ++p) {
        auto dir = tmp / ("path" + std::to_string(p));
        EXPECT_TRUE(std::filesystem::exists(dir / "round0.json"));
        EXPECT_TRUE(std::filesystem::exists(dir / "round1.json"));
        EXPECT_TRUE(std::filesystem::exists(dir / "round2.json"));
        EXPECT_FALSE(std::filesystem::exists(dir / "round3.json"));
        EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
    }
}
