#include "rethinker/latin_square.hpp"

#include <stdexcept>

namespace rethinker {

LatinSquare::LatinSquare(std::vector<std::vector<int>> cells) : cells_(std::move(cells)) {}

LatinSquare build_cyclic(std::size_t n)
{
    if (n == 0) {
        throw std::invalid_argument("Latin square order must be >= 1");
    }
    std::vector<std::vector<int>> cells(n, std::vector<int>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            cells[i][j] = static_cast<int>((i + j) % n) + 1;
        }
    }
    return LatinSquare(std::move(cells));
}

Permutation row_for_round(const LatinSquare& square, std::size_t round)
{
    return square.row(round % square.order());
}

std::string LatinViolation::describe() const
{
    switch (axis) {
    case Axis::shape:
        return "row " + std::to_string(index) + " has wrong length";
    case Axis::symbol:
        return "row " + std::to_string(index) + " holds out-of-range symbol " + std::to_string(symbol);
    case Axis::row:
        return "row " + std::to_string(index) + " repeats symbol " + std::to_string(symbol);
    case Axis::column:
        return "column " + std::to_string(index) + " repeats symbol " + std::to_string(symbol);
    }
    return {};
}

std::optional<LatinViolation> validate(const LatinSquare& square)
{
    const auto n = square.order();
    const auto& cells = square.cells();
    for (std::size_t i = 0; i < n; ++i) {
        if (cells[i].size() != n) {
            return LatinViolation{LatinViolation::Axis::shape, i, 0};
        }
        for (int v : cells[i]) {
            if (v < 1 || static_cast<std::size_t>(v) > n) {
                return LatinViolation{LatinViolation::Axis::symbol, i, v};
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<bool> seen(n + 1, false);
        for (std::size_t j = 0; j < n; ++j) {
            int v = cells[i][j];
            if (seen[v]) {
                return LatinViolation{LatinViolation::Axis::row, i, v};
            }
            seen[v] = true;
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<bool> seen(n + 1, false);
        for (std::size_t i = 0; i < n; ++i) {
            int v = cells[i][j];
            if (seen[v]) {
                return LatinViolation{LatinViolation::Axis::column, j, v};
            }
            seen[v] = true;
        }
    }
    return std::nullopt;
}

void check_permutation(std::span<const int> perm, std::size_t expected_size)
{
    if (perm.size() != expected_size) {
        throw std::invalid_argument("permutation length " + std::to_string(perm.size()) +
                                    " != item count " + std::to_string(expected_size));
    }
    std::vector<bool> seen(perm.size() + 1, false);
    for (int p : perm) {
        if (p < 1 || static_cast<std::size_t>(p) > perm.size() || seen[p]) {
            throw std::invalid_argument("not a permutation of 1..n");
        }
        seen[p] = true;
    }
}

Permutation inverse_permutation(std::span<const int> perm)
{
    check_permutation(perm, perm.size());
    Permutation inv(perm.size());
    for (std::size_t p = 0; p < perm.size(); ++p) {
        inv[static_cast<std::size_t>(perm[p] - 1)] = static_cast<int>(p + 1);
    }
    return inv;
}

} // namespace rethinker
