#include "oracles.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <set>

namespace mols::test {

std::vector<std::vector<Cell>> brute_transversals(const LatinSquare &square) {
    const int n = square.order();
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<Cell>> out;
    do {
        std::uint64_t symbols = 0;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            const std::uint64_t bit = 1ull << square.at(i, perm[static_cast<std::size_t>(i)]);
            if (symbols & bit)
                ok = false;
            symbols |= bit;
        }
        if (ok) {
            std::vector<Cell> cells;
            for (int i = 0; i < n; ++i)
                cells.push_back(Cell{i, perm[static_cast<std::size_t>(i)]});
            out.push_back(std::move(cells));
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

namespace {

void gen_squares(int n, int cell, std::vector<std::vector<int>> &grid,
                 std::vector<std::uint32_t> &row_used, std::vector<std::uint32_t> &col_used,
                 std::vector<LatinSquare> &out) {
    if (cell == n * n) {
        out.push_back(LatinSquare::unchecked(grid));
        return;
    }
    const int i = cell / n, j = cell % n;
    for (int k = 0; k < n; ++k) {
        const std::uint32_t bit = 1u << k;
        if ((row_used[static_cast<std::size_t>(i)] & bit) ||
            (col_used[static_cast<std::size_t>(j)] & bit))
            continue;
        grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = k;
        row_used[static_cast<std::size_t>(i)] |= bit;
        col_used[static_cast<std::size_t>(j)] |= bit;
        gen_squares(n, cell + 1, grid, row_used, col_used, out);
        row_used[static_cast<std::size_t>(i)] &= ~bit;
        col_used[static_cast<std::size_t>(j)] &= ~bit;
    }
}

} // namespace

std::vector<LatinSquare> all_latin_squares(int order) {
    std::vector<std::vector<int>> grid(static_cast<std::size_t>(order),
                                       std::vector<int>(order, 0));
    std::vector<std::uint32_t> row_used(static_cast<std::size_t>(order), 0);
    std::vector<std::uint32_t> col_used(static_cast<std::size_t>(order), 0);
    std::vector<LatinSquare> out;
    gen_squares(order, 0, grid, row_used, col_used, out);
    return out;
}

namespace {

bool mate_search(const LatinSquare &square, int cell, std::vector<std::uint32_t> &row_used,
                 std::vector<std::uint32_t> &col_used, std::vector<std::uint32_t> &pair_used) {
    const int n = square.order();
    if (cell == n * n)
        return true;
    const int i = cell / n, j = cell % n;
    for (int k = 0; k < n; ++k) {
        const std::uint32_t bit = 1u << k;
        if ((row_used[static_cast<std::size_t>(i)] & bit) ||
            (col_used[static_cast<std::size_t>(j)] & bit))
            continue;
        const std::size_t pair = static_cast<std::size_t>(square.at(i, j));
        if (pair_used[pair] & bit)
            continue;
        row_used[static_cast<std::size_t>(i)] |= bit;
        col_used[static_cast<std::size_t>(j)] |= bit;
        pair_used[pair] |= bit;
        if (mate_search(square, cell + 1, row_used, col_used, pair_used))
            return true;
        row_used[static_cast<std::size_t>(i)] &= ~bit;
        col_used[static_cast<std::size_t>(j)] &= ~bit;
        pair_used[pair] &= ~bit;
    }
    return false;
}

} // namespace

bool has_mate_backtracking(const LatinSquare &square) {
    const int n = square.order();
    std::vector<std::uint32_t> row_used(static_cast<std::size_t>(n), 0);
    std::vector<std::uint32_t> col_used(static_cast<std::size_t>(n), 0);
    std::vector<std::uint32_t> pair_used(static_cast<std::size_t>(n), 0);
    return mate_search(square, 0, row_used, col_used, pair_used);
}

std::vector<std::vector<int>> brute_solutions(const exactcover::DiophantineSystem &system,
                                              std::uint64_t cap) {
    std::uint64_t combos = 1;
    for (int c = 0; c < system.num_cols(); ++c) {
        combos *= static_cast<std::uint64_t>(system.bound(c)) + 1;
        assert(combos <= cap && "brute_solutions: search space too large");
    }
    (void)cap;
    std::vector<int> x(static_cast<std::size_t>(system.num_cols()), 0);
    std::vector<std::vector<int>> out;
    for (;;) {
        exactcover::Solution sol{x};
        if (exactcover::satisfies(system, sol))
            out.push_back(x);
        int c = 0;
        while (c < system.num_cols()) {
            if (x[static_cast<std::size_t>(c)] < system.bound(c)) {
                x[static_cast<std::size_t>(c)]++;
                break;
            }
            x[static_cast<std::size_t>(c)] = 0;
            ++c;
        }
        if (c == system.num_cols())
            break;
    }
    return out;
}

namespace {

enum class Tri : std::int8_t { Unset = 0, True = 1, False = -1 };

// returns false on a falsified clause
bool unit_propagate(const std::vector<std::vector<int>> &clauses, std::vector<Tri> &assign) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto &cl : clauses) {
            int unassigned = 0;
            int last = 0;
            bool sat = false;
            for (const int l : cl) {
                const Tri v = assign[static_cast<std::size_t>(std::abs(l))];
                if (v == Tri::Unset) {
                    ++unassigned;
                    last = l;
                } else if ((v == Tri::True) == (l > 0)) {
                    sat = true;
                    break;
                }
            }
            if (sat)
                continue;
            if (unassigned == 0)
                return false;
            if (unassigned == 1) {
                assign[static_cast<std::size_t>(std::abs(last))] = last > 0 ? Tri::True : Tri::False;
                changed = true;
            }
        }
    }
    return true;
}

bool dpll(const std::vector<std::vector<int>> &clauses, std::vector<Tri> assign, int num_vars) {
    if (!unit_propagate(clauses, assign))
        return false;
    int branch = 0;
    for (int v = 1; v <= num_vars; ++v)
        if (assign[static_cast<std::size_t>(v)] == Tri::Unset) {
            branch = v;
            break;
        }
    if (branch == 0)
        return true;
    auto positive = assign;
    positive[static_cast<std::size_t>(branch)] = Tri::True;
    if (dpll(clauses, std::move(positive), num_vars))
        return true;
    assign[static_cast<std::size_t>(branch)] = Tri::False;
    return dpll(clauses, std::move(assign), num_vars);
}

void dpll_models(const std::vector<std::vector<int>> &clauses, std::vector<Tri> &assign,
                 int num_vars, int project_vars, std::set<std::vector<std::int8_t>> &out) {
    std::vector<Tri> saved = assign;
    if (!unit_propagate(clauses, assign)) {
        assign = std::move(saved);
        return;
    }
    int branch = 0;
    for (int v = 1; v <= num_vars; ++v)
        if (assign[static_cast<std::size_t>(v)] == Tri::Unset) {
            branch = v;
            break;
        }
    if (branch == 0) {
        std::vector<std::int8_t> model(static_cast<std::size_t>(project_vars));
        for (int v = 1; v <= project_vars; ++v)
            model[static_cast<std::size_t>(v - 1)] =
                assign[static_cast<std::size_t>(v)] == Tri::True ? 1 : 0;
        out.insert(std::move(model));
        assign = std::move(saved);
        return;
    }
    assign[static_cast<std::size_t>(branch)] = Tri::True;
    dpll_models(clauses, assign, num_vars, project_vars, out);
    assign[static_cast<std::size_t>(branch)] = Tri::False;
    dpll_models(clauses, assign, num_vars, project_vars, out);
    assign = std::move(saved);
}

} // namespace

bool dpll_satisfiable(int num_vars, const std::vector<std::vector<int>> &clauses) {
    std::vector<Tri> assign(static_cast<std::size_t>(num_vars) + 1, Tri::Unset);
    return dpll(clauses, std::move(assign), num_vars);
}

std::vector<std::vector<std::int8_t>> dpll_all_models(int num_vars,
                                                      const std::vector<std::vector<int>> &clauses,
                                                      int project_vars) {
    std::vector<Tri> assign(static_cast<std::size_t>(num_vars) + 1, Tri::Unset);
    std::set<std::vector<std::int8_t>> models;
    dpll_models(clauses, assign, num_vars, project_vars, models);
    return {models.begin(), models.end()};
}

std::vector<std::vector<int>> php_cnf(int pigeons, int holes, int &num_vars) {
    // var(p, h) = p * holes + h + 1
    num_vars = pigeons * holes;
    std::vector<std::vector<int>> clauses;
    for (int p = 0; p < pigeons; ++p) {
        std::vector<int> at_least;
        for (int h = 0; h < holes; ++h)
            at_least.push_back(p * holes + h + 1);
        clauses.push_back(std::move(at_least));
    }
    for (int h = 0; h < holes; ++h)
        for (int p1 = 0; p1 < pigeons; ++p1)
            for (int p2 = p1 + 1; p2 < pigeons; ++p2)
                clauses.push_back({-(p1 * holes + h + 1), -(p2 * holes + h + 1)});
    return clauses;
}

std::vector<std::vector<int>> random_cnf(std::mt19937_64 &rng, int num_vars, int num_clauses,
                                         int width) {
    std::uniform_int_distribution<int> var_dist(1, num_vars);
    std::uniform_int_distribution<int> sign_dist(0, 1);
    std::vector<std::vector<int>> clauses;
    clauses.reserve(static_cast<std::size_t>(num_clauses));
    for (int c = 0; c < num_clauses; ++c) {
        std::set<int> vars;
        while (static_cast<int>(vars.size()) < width)
            vars.insert(var_dist(rng));
        std::vector<int> clause;
        for (const int v : vars)
            clause.push_back(sign_dist(rng) ? v : -v);
        clauses.push_back(std::move(clause));
    }
    return clauses;
}

namespace {

bool random_fill(int n, int cell, std::vector<std::vector<int>> &grid,
                 std::vector<std::uint32_t> &row_used, std::vector<std::uint32_t> &col_used,
                 std::mt19937_64 &rng) {
    if (cell == n * n)
        return true;
    const int i = cell / n, j = cell % n;
    std::vector<int> symbols(static_cast<std::size_t>(n));
    std::iota(symbols.begin(), symbols.end(), 0);
    std::shuffle(symbols.begin(), symbols.end(), rng);
    for (const int k : symbols) {
        const std::uint32_t bit = 1u << k;
        if ((row_used[static_cast<std::size_t>(i)] & bit) ||
            (col_used[static_cast<std::size_t>(j)] & bit))
            continue;
        grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = k;
        row_used[static_cast<std::size_t>(i)] |= bit;
        col_used[static_cast<std::size_t>(j)] |= bit;
        if (random_fill(n, cell + 1, grid, row_used, col_used, rng))
            return true;
        row_used[static_cast<std::size_t>(i)] &= ~bit;
        col_used[static_cast<std::size_t>(j)] &= ~bit;
    }
    return false;
}

} // namespace

LatinSquare random_latin_square(int order, std::mt19937_64 &rng) {
    std::vector<std::vector<int>> grid(static_cast<std::size_t>(order),
                                       std::vector<int>(order, 0));
    std::vector<std::uint32_t> row_used(static_cast<std::size_t>(order), 0);
    std::vector<std::uint32_t> col_used(static_cast<std::size_t>(order), 0);
    const bool ok = random_fill(order, 0, grid, row_used, col_used, rng);
    assert(ok);
    (void)ok;
    return LatinSquare::unchecked(std::move(grid));
}

} // namespace mols::test
