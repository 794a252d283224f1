#pragma once

// Shared test fixtures: the order-5 demo square with its transversal
// decomposition and mate, and the published type-U / type-W transversal
// representation pair with their dark-cell colourings.

#include <vector>

#include "mols/latin.hpp"

namespace mols::test {

// Cyclic order-5 square, decomposable into five disjoint transversals.
inline LatinSquare demo5() {
    return LatinSquare::unchecked({{0, 1, 2, 3, 4},
                                   {1, 2, 3, 4, 0},
                                   {2, 3, 4, 0, 1},
                                   {3, 4, 0, 1, 2},
                                   {4, 0, 1, 2, 3}});
}

// Its orthogonal mate, produced by labelling the transversal classes.
inline LatinSquare demo5_mate() {
    return LatinSquare::unchecked({{0, 1, 4, 2, 3},
                                   {2, 3, 0, 1, 4},
                                   {1, 4, 2, 3, 0},
                                   {3, 0, 1, 4, 2},
                                   {4, 2, 3, 0, 1}});
}

// Transversal class labels of demo5 matching the mate's symbols: class c
// holds the cells {(i, j) : (3i + j) mod 5 = c}.
inline std::vector<std::vector<Cell>> demo5_transversal_classes() {
    std::vector<std::vector<Cell>> classes(5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            classes[static_cast<std::size_t>((3 * i + j) % 5)].push_back(Cell{i, j});
    return classes;
}

// The first transversal class (the red cells of the figure-style rendering).
inline std::vector<Cell> demo5_red_cells() { return demo5_transversal_classes()[0]; }

// Type-U square of the published type-UW transversal representation pair.
inline LatinSquare type_u() {
    return LatinSquare::unchecked({{0, 2, 3, 4, 5, 6, 1, 7, 8, 9},
                                   {1, 0, 4, 9, 7, 2, 6, 5, 3, 8},
                                   {3, 9, 8, 2, 4, 1, 0, 6, 7, 5},
                                   {4, 1, 7, 0, 3, 5, 9, 8, 6, 2},
                                   {5, 8, 0, 1, 2, 7, 3, 9, 4, 6},
                                   {8, 3, 1, 6, 9, 0, 4, 2, 5, 7},
                                   {2, 7, 6, 8, 0, 9, 5, 3, 1, 4},
                                   {9, 6, 2, 5, 1, 8, 7, 4, 0, 3},
                                   {6, 4, 5, 7, 8, 3, 2, 1, 9, 0},
                                   {7, 5, 9, 3, 6, 4, 8, 0, 2, 1}});
}

inline std::vector<Cell> type_u_dark_cells() {
    return {Cell{6, 1}, Cell{6, 3}, Cell{7, 3}, Cell{7, 5}, Cell{8, 0}, Cell{8, 1},
            Cell{8, 2}, Cell{8, 4}, Cell{9, 0}, Cell{9, 2}, Cell{9, 4}, Cell{9, 5}};
}

// Type-W square of the same pair.
inline LatinSquare type_w() {
    return LatinSquare::unchecked({{0, 1, 8, 3, 7, 9, 2, 4, 5, 6},
                                   {1, 6, 7, 4, 2, 0, 8, 3, 9, 5},
                                   {2, 5, 4, 6, 3, 1, 7, 9, 8, 0},
                                   {3, 0, 2, 7, 9, 6, 5, 8, 4, 1},
                                   {5, 9, 6, 0, 1, 3, 4, 7, 2, 8},
                                   {6, 8, 3, 5, 4, 2, 9, 0, 1, 7},
                                   {7, 2, 1, 9, 8, 5, 3, 6, 0, 4},
                                   {8, 4, 9, 2, 0, 7, 1, 5, 6, 3},
                                   {9, 3, 0, 8, 5, 4, 6, 1, 7, 2},
                                   {4, 7, 5, 1, 6, 8, 0, 2, 3, 9}});
}

inline std::vector<Cell> type_w_dark_cells() {
    return {Cell{5, 0}, Cell{5, 3}, Cell{6, 0}, Cell{6, 4}, Cell{7, 1}, Cell{7, 2},
            Cell{8, 3}, Cell{8, 5}, Cell{9, 1}, Cell{9, 2}, Cell{9, 4}, Cell{9, 5}};
}

// Row 0 of the type-U square read against the type-W square selects these
// cells of W (the red-bordered transversal).
inline std::vector<Cell> type_w_marked_transversal() {
    return {Cell{0, 0}, Cell{6, 1}, Cell{5, 2}, Cell{1, 3}, Cell{8, 4},
            Cell{3, 5}, Cell{7, 6}, Cell{4, 7}, Cell{2, 8}, Cell{9, 9}};
}

} // namespace mols::test
