#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mols/expected.hpp"

namespace mols::exactcover {

// Frozen 0-1 system A x = b, 0 <= x <= u with positive b and u.  Built through
// SystemBuilder; immutable and shareable once frozen.
class DiophantineSystem {
public:
    int num_rows() const { return num_rows_; }
    int num_cols() const { return num_cols_; }
    // Rows covered by a column, ascending.
    std::span<const int> col_support(int col) const {
        const auto b = static_cast<std::size_t>(col_begin_[static_cast<std::size_t>(col)]);
        const auto e = static_cast<std::size_t>(col_begin_[static_cast<std::size_t>(col) + 1]);
        return {support_rows_.data() + b, e - b};
    }
    int rhs(int row) const { return rhs_[static_cast<std::size_t>(row)]; }
    int bound(int col) const { return bounds_[static_cast<std::size_t>(col)]; }
    std::size_t entry_count() const { return support_rows_.size(); }

private:
    friend class SystemBuilder;
    int num_rows_ = 0;
    int num_cols_ = 0;
    std::vector<int> support_rows_;  // grouped by column, sorted by row
    std::vector<int> col_begin_;     // size num_cols+1
    std::vector<int> rhs_;
    std::vector<int> bounds_;
};

enum class BuildErrorKind { IndexOutOfRange, DuplicateEntry, BadValue };
struct BuildError {
    BuildErrorKind kind;
    int row = -1;
    int col = -1;
};

class SystemBuilder {
public:
    SystemBuilder(int rows, int cols);

    Expected<bool, BuildError> add_entry(int row, int col);
    Expected<bool, BuildError> set_rhs(int row, int value);
    Expected<bool, BuildError> set_bound(int col, int value);

    DiophantineSystem finalize();

private:
    int rows_, cols_;
    std::vector<std::pair<int, int>> entries_;  // (col, row)
    std::vector<int> rhs_;
    std::vector<int> bounds_;
};

struct Solution {
    std::vector<int> x;  // value per column
};

struct SolveControl {
    std::optional<std::uint64_t> max_solutions;
    std::optional<std::uint64_t> node_budget;
};

struct SolveStats {
    std::uint64_t solutions = 0;
    std::uint64_t nodes = 0;  // column picks performed
    bool budget_exhausted = false;
};

// Emits every solution exactly once in a deterministic order.  The search
// locks onto the open row with the fewest usable columns (lowest index on
// ties) and covers it with columns in ascending index order.
SolveStats solve_all(const DiophantineSystem &system, const SolveControl &control,
                     const std::function<void(const Solution &)> &emit);

std::optional<Solution> solve_first(const DiophantineSystem &system, const SolveControl &control = {},
                                    SolveStats *stats_out = nullptr);

bool satisfies(const DiophantineSystem &system, const Solution &solution);

// Text form for golden tests: header "M N", entry count, one "r c" line per
// entry, then the rhs row and the bounds row.
void write_system(std::ostream &out, const DiophantineSystem &system);
Expected<DiophantineSystem, std::string> read_system(std::istream &in);

} // namespace mols::exactcover
