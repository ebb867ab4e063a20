#include "rethinker/errors.hpp"
#include "rethinker/gateway.hpp"
#include "rethinker/mock_backend.hpp"

#include "support/harness.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace rethinker;
using namespace rethinker::testing;

namespace {

std::vector<Message> ask(const std::string& text)
{
    return {Message{Role::user, text, std::nullopt}};
}

} // namespace

TEST(Gateway, StageSamplingParameters)
{
    RunConfig config;
    Gateway g(std::make_shared<MockBackend>(MockScript{}), config);
    auto solver = g.make_request(Stage::solver, ask("q"), "t");
    auto selector = g.make_request(Stage::selector, ask("q"), "t");
    EXPECT_DOUBLE_EQ(solver.top_p, 1.0);
    EXPECT_DOUBLE_EQ(selector.top_p, 0.8);
    EXPECT_FALSE(solver.want_logprobs);
    EXPECT_TRUE(selector.want_logprobs);
    EXPECT_EQ(solver.max_tokens, 8192);
}

TEST(Gateway, RetriesTransportErrors)
{
    int calls = 0;
    auto backend = std::make_shared<FunctionBackend>([&](const GenerationRequest&) {
        if (++calls < 3) {
            throw TransportError("connection reset");
        }
        GenerationResult r;
        r.text = "ok";
        return r;
    });
    RunConfig config;
    config.max_retries = 3;
    Gateway g(backend, config);
    std::vector<std::chrono::milliseconds> sleeps;
    g.set_sleep([&](std::chrono::milliseconds d) { sleeps.push_back(d); });
    auto r = g.generate(g.make_request(Stage::solver, ask("q"), "t"));
    EXPECT_EQ(r.text, "ok");
    EXPECT_EQ(r.attempts, 3);
    ASSERT_EQ(sleeps.size(), 2u);
    EXPECT_EQ(sleeps[1], 2 * sleeps[0]);
}

TEST(Gateway, GivesUpAfterMaxRetries)
{
    auto backend = std::make_shared<FunctionBackend>(
        [](const GenerationRequest&) -> GenerationResult { throw TransportError("down"); });
    RunConfig config;
    config.max_retries = 2;
    Gateway g(backend, config);
    g.set_sleep([](std::chrono::milliseconds) {});
    EXPECT_THROW(g.generate(g.make_request(Stage::solver, ask("q"), "t")), TransportError);
    EXPECT_EQ(g.total_attempts(), 3u);
}

TEST(Gateway, RequestErrorsAreNotRetried)
{
    int calls = 0;
    auto backend = std::make_shared<FunctionBackend>([&](const GenerationRequest&) -> GenerationResult {
        ++calls;
        throw RequestError("bad request");
    });
    Gateway g(backend, RunConfig{});
    EXPECT_THROW(g.generate(g.make_request(Stage::solver, ask("q"), "t")), RequestError);
    EXPECT_EQ(calls, 1);
}

TEST(Gateway, ValidatesRequests)
{
    Gateway g(std::make_shared<MockBackend>(MockScript{}), RunConfig{});
    EXPECT_THROW(g.generate(g.make_request(Stage::solver, {}, "t")), RequestError);
    auto r = g.make_request(Stage::solver, ask("q"), "t");
    r.top_p = 0.0;
    EXPECT_THROW(g.generate(r), RequestError);
}

TEST(Gateway, MissingLogprobs)
{
    Gateway strict(std::make_shared<MockBackend>(script({rule("q", "<select>Response 1</select>")})), RunConfig{});
    EXPECT_THROW(strict.generate(strict.make_request(Stage::selector, ask("q"), "t")), LogprobsUnsupported);

    RunConfig lenient;
    lenient.missing_logprobs_as_uninformative = true;
    Gateway soft(std::make_shared<MockBackend>(script({rule("q", "<select>Response 1</select>")})), lenient);
    auto r = soft.generate(soft.make_request(Stage::selector, ask("q"), "t"));
    EXPECT_FALSE(r.token_logprobs);
}

TEST(MockBackend, FirstMatchWinsAndFallback)
{
    MockBackend m(script({rule("[path=1]", "one"), rule("[path=", "any path")}));
    GenerationRequest r;
    r.messages = ask("hello");
    r.tag = "[query=q][path=1]";
    EXPECT_EQ(m.complete(r).text, "one");
    r.tag = "[query=q][path=2]";
    EXPECT_EQ(m.complete(r).text, "any path");
    r.tag = "[query=q]";
    EXPECT_EQ(m.complete(r).text, kDefaultMockText);
    EXPECT_EQ(m.call_count(), 3u);
    EXPECT_EQ(m.count_tagged("[path="), 2u);
}

TEST(MockBackend, StopMarkerAndLength)
{
    MockBackend m(script({rule("x", "a b <code>print(1)</code> trailing words")}));
    GenerationRequest r;
    r.messages = ask("x");
    r.stop_markers = {"</code>"};
    auto res = m.complete(r);
    EXPECT_EQ(res.text, "a b <code>print(1)</code>");
    EXPECT_EQ(res.finish_reason, FinishReason::tool_pause);

    r.stop_markers.clear();
    r.max_tokens = 2;
    res = m.complete(r);
    EXPECT_EQ(res.text, "a b");
    EXPECT_EQ(res.finish_reason, FinishReason::length);
}

TEST(MockBackend, ScriptParsing)
{
    std::istringstream ok(R"({"match": "a", "text": "b", "logprobs": [-0.1, -0.2]}
{"match": "*", "text": "default"})");
    auto s = parse_mock_script(ok);
    ASSERT_EQ(s.rules.size(), 1u);
    EXPECT_EQ(s.fallback.text, "default");
    EXPECT_EQ(s.rules[0].logprobs->size(), 2u);

    std::istringstream bad(R"({"match": "a", "text": "b"}
{"match": "a"})");
    try {
        parse_mock_script(bad);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(HttpBackend, BodyAndResponseParsing)
{
    HttpBackendConfig cfg;
    cfg.base_url = "http://localhost:1";
    cfg.model = "m";
    HttpBackend b(cfg);
    GenerationRequest r;
    r.messages = ask("hi");
    r.want_logprobs = true;
    r.stop_markers = {"</code>"};
    r.tag = "[secret-tag]";
    auto body = b.build_body(r);
    EXPECT_EQ(body["model"], "m");
    EXPECT_TRUE(body["logprobs"].get<bool>());
    EXPECT_EQ(body.dump().find("secret-tag"), std::string::npos);

    Json resp = Json::parse(R"({"choices": [{"message": {"content": "x <code>1"},
        "finish_reason": "stop",
        "logprobs": {"content": [{"token": "x", "logprob": -0.5}]}}],
        "usage": {"prompt_tokens": 3, "completion_tokens": 1}})");
    auto res = HttpBackend::parse_response(resp, r);
    EXPECT_EQ(res.text, "x <code>1</code>");
    ASSERT_TRUE(res.token_logprobs);
    EXPECT_DOUBLE_EQ((*res.token_logprobs)[0].logprob, -0.5);
}
