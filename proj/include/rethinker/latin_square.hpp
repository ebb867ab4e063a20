#pragma once
// Cyclic Latin squares used to rotate candidate positions across selector
// rounds so every candidate occupies every position equally often.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rethinker {

// A permutation of 1..n, stored 1-based as presented.
using Permutation = std::vector<int>;

class LatinSquare {
public:
    // Cells must be n x n. No validation here; see validate().
    explicit LatinSquare(std::vector<std::vector<int>> cells);

    std::size_t order() const noexcept { return cells_.size(); }
    int at(std::size_t row, std::size_t col) const { return cells_.at(row).at(col); }
    const std::vector<int>& row(std::size_t i) const { return cells_.at(i); }
    const std::vector<std::vector<int>>& cells() const noexcept { return cells_; }

    bool operator==(const LatinSquare&) const = default;

private:
    std::vector<std::vector<int>> cells_;
};

// cells[i][j] = ((i + j) mod n) + 1. Throws std::invalid_argument for n == 0.
LatinSquare build_cyclic(std::size_t n);

// Row (r mod n): rounds past n reuse rows cyclically.
Permutation row_for_round(const LatinSquare& square, std::size_t round);

struct LatinViolation {
    enum class Axis { row, column, shape, symbol };
    Axis axis;
    std::size_t index;
    int symbol;

    std::string describe() const;
};

// First violation of "each symbol in 1..n exactly once per row and column",
// scanning all rows first, then all columns.
std::optional<LatinViolation> validate(const LatinSquare& square);

Permutation inverse_permutation(std::span<const int> perm);

// Output position p holds items[perm[p] - 1]. Throws std::invalid_argument on
// a length mismatch or when perm is not a permutation of 1..n.
template <typename T>
std::vector<T> apply_permutation(std::span<const int> perm, std::span<const T> items);

void check_permutation(std::span<const int> perm, std::size_t expected_size);

template <typename T>
std::vector<T> apply_permutation(std::span<const int> perm, std::span<const T> items)
{
    check_permutation(perm, items.size());
    std::vector<T> out;
    out.reserve(items.size());
    for (int p : perm) {
        out.push_back(items[static_cast<std::size_t>(p - 1)]);
    }
    return out;
}

} // namespace rethinker
