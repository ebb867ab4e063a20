#include "rethinker/latin_square.hpp"

#include <gtest/gtest.h>

#include <stdexcept>

using namespace rethinker;

TEST(LatinSquare, CyclicIsValid)
{
    for (std::size_t n = 1; n <= 32; ++n) {
        EXPECT_FALSE(validate(build_cyclic(n))) << "n=" << n;
    }
    EXPECT_THROW(build_cyclic(0), std::invalid_argument);
}

TEST(LatinSquare, OrderOne)
{
    auto sq = build_cyclic(1);
    EXPECT_EQ(sq.cells(), (std::vector<std::vector<int>>{{1}}));
}

TEST(LatinSquare, RowsWrap)
{
    auto sq = build_cyclic(3);
    EXPECT_EQ(row_for_round(sq, 0), (Permutation{1, 2, 3}));
    EXPECT_EQ(row_for_round(sq, 4), (Permutation{2, 3, 1}));
}

TEST(LatinSquare, DetectsViolations)
{
    LatinSquare dup_row({{1, 1}, {2, 1}});
    auto v = validate(dup_row);
    ASSERT_TRUE(v);
    EXPECT_EQ(v->axis, LatinViolation::Axis::row);
    EXPECT_EQ(v->index, 0u);

    LatinSquare dup_col({{1, 2}, {1, 2}});
    v = validate(dup_col);
    ASSERT_TRUE(v);
    EXPECT_EQ(v->axis, LatinViolation::Axis::column);

    LatinSquare ragged({{1, 2}, {2}});
    v = validate(ragged);
    ASSERT_TRUE(v);
    EXPECT_EQ(v->axis, LatinViolation::Axis::shape);

    LatinSquare out_of_range({{1, 3}, {3, 1}});
    EXPECT_TRUE(validate(out_of_range));
    EXPECT_FALSE(validate(out_of_range)->describe().empty());
}

TEST(Permutation, ApplyAndInvert)
{
    const std::vector<std::string> items{"a", "b", "c"};
    const Permutation perm{3, 1, 2};
    auto shown = apply_permutation<std::string>(perm, items);
    EXPECT_EQ(shown, (std::vector<std::string>{"c", "a", "b"}));
    auto inv = inverse_permutation(perm);
    auto back = apply_permutation<std::string>(inv, shown);
    EXPECT_EQ(back, items);
    EXPECT_THROW(apply_permutation<std::string>(Permutation{1, 1, 2}, items), std::invalid_argument);
    EXPECT_THROW(apply_permutation<std::string>(Permutation{1, 2}, items), std::invalid_argument);
}
