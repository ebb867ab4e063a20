#include "rethinker/errors.hpp"
#include "rethinker/seed_pool.hpp"

#include "support/harness.hpp"

#include <gtest/gtest.h>

using namespace rethinker;
using namespace rethinker::testing;

TEST(SeedPool, DeduplicatesCaseAndWhitespace)
{
    SeedPool pool;
    EXPECT_TRUE(pool.add({"Latin square design", "math", SeedPhrase::Origin::initial}));
    EXPECT_FALSE(pool.add({"  latin   SQUARE design ", "math", SeedPhrase::Origin::extracted}));
    EXPECT_TRUE(pool.contains("LATIN SQUARE DESIGN"));
    EXPECT_EQ(pool.merge({{"quantum tunnelling", "physics", SeedPhrase::Origin::extracted},
                          {"Latin square design", "math", SeedPhrase::Origin::extracted}}),
              1u);
    EXPECT_EQ(pool.size(), 2u);
    EXPECT_EQ(pool.domains(), (std::vector<std::string>{"math", "physics"}));

    auto back = SeedPool::from_json(pool.to_json());
    EXPECT_EQ(back.size(), 2u);
    EXPECT_EQ(back.phrases()[1].origin, SeedPhrase::Origin::extracted);
}

TEST(SeedPool, ParsePythonDict)
{
    auto d = parse_python_dict(R"(```python
{
    "math": ["prime gaps", 'modular forms'],  # comment
    'bio': ("gene \"drive\"",),
}
```)");
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d["math"], (std::vector<std::string>{"prime gaps", "modular forms"}));
    EXPECT_EQ(d["bio"], (std::vector<std::string>{"gene \"drive\""}));
    EXPECT_THROW(parse_python_dict("{'a': [1, 2]}"), ParseError);
    EXPECT_THROW(parse_python_dict("no dict"), ParseError);
}

TEST(SeedPool, ParseExtractedPhrases)
{
    auto p = parse_extracted_phrases("<answer>draft</answer> final: <answer>dark matter halo, single, \nneural "
                                     "scaling laws</answer>");
    ASSERT_TRUE(p);
    EXPECT_EQ(*p, (std::vector<std::string>{"dark matter halo", "neural scaling laws"}));
    EXPECT_FALSE(parse_extracted_phrases("no tags"));
}

TEST(SeedPool, InitRetriesThenGivesUp)
{
    Harness h(script({rule("[seed=init][attempt=0]", "not a dict"),
                      rule("[seed=init][attempt=1]", "{'math': ['prime gaps', 'group cohomology']}")}),
              RunConfig{});
    auto pool = init_seed_pool({"math"}, *h.gateway);
    EXPECT_EQ(pool.size(), 2u);
    EXPECT_EQ(h.mock->call_count(), 2u);

    Harness bad(script({rule("*", "nothing useful")}), RunConfig{});
    EXPECT_EQ(init_seed_pool({"math"}, *bad.gateway).size(), 0u);
    EXPECT_EQ(bad.mock->call_count(), 2u);
}

TEST(SeedPool, Extract)
{
    Harness h(script({rule("[seed=extract]", "<answer>protein folding pathways, RNA splicing</answer>")}),
              RunConfig{});
    auto phrases = extract_seed_phrases("Some article text", *h.gateway, nullptr, "bio");
    ASSERT_EQ(phrases.size(), 2u);
    EXPECT_EQ(phrases[0].domain, "bio");
    EXPECT_EQ(phrases[0].origin, SeedPhrase::Origin::extracted);
    EXPECT_NE(h.mock->request_log()[0].subject.find("Some article text"), std::string::npos);
}
