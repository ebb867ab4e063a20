#include "rethinker/trace.hpp"

#include "support/harness.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <thread>

using namespace rethinker;
using namespace rethinker::testing;

TEST(TraceContext, Tag)
{
    EXPECT_EQ((TraceContext{"q1", 2, Stage::critic, 1}).tag(), "[query=q1][path=2][stage=critic][round=1]");
    EXPECT_EQ((TraceContext{"q1", 0, Stage::selector, 3}).tag(), "[query=q1][stage=selector][round=3]");
}

TEST(TraceWriter, ConcurrentWritersProduceWholeLines)
{
    TempDir tmp;
    const auto path = tmp / "trace.jsonl";
    {
        TraceWriter w(path, 8);
        std::vector<std::thread> threads;
        for (int t = 0; t < 8; ++t) {
            threads.emplace_back([&w, t] {
                for (int i = 0; i < 200; ++i) {
                    ToolInvocation inv;
                    inv.arguments = Json{{"code", std::string(100 + i, 'x')}, {"t", t}, {"i", i}};
                    inv.output_text = "out";
                    w.append_tool(TraceContext{"q", t + 1, Stage::solver, 0}, inv);
                }
            });
        }
        for (auto& th : threads) {
            th.join();
        }
        w.flush();
    }
    std::ifstream in(path);
    std::set<std::uint64_t> seqs;
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line);) {
        auto j = Json::parse(line);
        EXPECT_EQ(j["v"], 1);
        EXPECT_EQ(j["kind"], "tool");
        seqs.insert(j["seq"].get<std::uint64_t>());
        ++lines;
    }
    EXPECT_EQ(lines, 1600u);
    EXPECT_EQ(seqs.size(), 1600u);
}

TEST(TraceWriter, ModelRecordCarriesTag)
{
    TempDir tmp;
    const auto path = tmp / "trace.jsonl";
    {
        TraceWriter w(path);
        GenerationRequest req;
        req.messages = {Message{Role::user, "question", std::nullopt}};
        req.tag = "[query=q][stage=judge][round=0]";
        GenerationResult res;
        res.text = "VERDICT: yes";
        w.append_model(TraceContext{"q", 0, Stage::judge, 0}, req, res);
    }
    std::ifstream in(path);
    std::string line;
    ASSERT_TRUE(std::getline(in, line));
    auto j = Json::parse(line);
    EXPECT_EQ(j["kind"], "model");
    EXPECT_EQ(j["stage"], "judge");
    EXPECT_EQ(j["invocation"]["tag"], "[query=q][stage=judge][round=0]");
    EXPECT_EQ(j["invocation"]["response"], "VERDICT: yes");
}
