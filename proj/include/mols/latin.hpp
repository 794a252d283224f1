#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mols/expected.hpp"

namespace mols {

inline constexpr int kMaxOrder = 32;

struct Cell {
    int row = 0;
    int col = 0;
    friend auto operator<=>(const Cell &, const Cell &) = default;
};

enum class SquareErrorKind { BadShape, BadSymbol, DuplicateInRow, DuplicateInCol };

struct SquareError {
    SquareErrorKind kind;
    int index = -1;  // offending row (DuplicateInRow) or column (DuplicateInCol)
    int symbol = -1;
};

// An order-n grid over symbols 0..n-1 with each symbol exactly once per row
// and column.  Instances are immutable; construct through validate() or, in
// test code, unchecked().
class LatinSquare {
public:
    static Expected<LatinSquare, SquareError> validate(const std::vector<std::vector<int>> &grid);
    static LatinSquare unchecked(std::vector<std::vector<int>> grid);

    int order() const { return order_; }
    int at(int row, int col) const { return cells_[static_cast<std::size_t>(row) * order_ + col]; }
    std::vector<int> row(int r) const;

    // Position of symbol k in column j (unique by the column invariant).
    int row_of_symbol_in_col(int symbol, int col) const;

    bool operator==(const LatinSquare &) const = default;
    std::size_t hash() const;
    // Bytes of the upper-left (n-1)x(n-1) subsquare; determines the square.
    std::string reduced_key() const;

private:
    LatinSquare(int order, std::vector<std::uint8_t> cells);
    int order_ = 0;
    std::vector<std::uint8_t> cells_;
};

struct TransversalError {
    std::string what;
};

// n cells of an order-n square, one per row and one per column; stored sorted
// by row.  Symbol distinctness is relative to a host square and checked by
// is_transversal().
class Transversal {
public:
    static Expected<Transversal, TransversalError> from_cells(int order, std::vector<Cell> cells);
    static Transversal unchecked(int order, std::vector<Cell> cells);

    int order() const { return order_; }
    std::span<const Cell> cells() const { return cells_; }
    int col_of_row(int row) const { return cells_[static_cast<std::size_t>(row)].col; }
    bool contains(Cell c) const;

    bool operator==(const Transversal &) const = default;

private:
    Transversal(int order, std::vector<Cell> cells);
    int order_ = 0;
    std::vector<Cell> cells_;
};

Expected<LatinSquare, SquareError> validate_square(const std::vector<std::vector<int>> &grid);

bool is_transversal(const LatinSquare &square, std::span<const Cell> cells);

// True iff the n^2 overlay pairs (a[i][j], b[i][j]) are pairwise distinct.
// Throws std::invalid_argument on an order mismatch.
bool are_orthogonal(const LatinSquare &a, const LatinSquare &b);

enum class MateErrorKind { NotDisjoint, NotCovering };
struct MateError {
    MateErrorKind kind;
    Cell cell{};  // witness: repeated or uncovered cell
};

// Builds the square R with R[i][j] = k iff (i,j) lies on ts[k].  The inputs
// must be pairwise disjoint transversals of `square` covering every cell.
Expected<LatinSquare, MateError> mate_from_transversals(const LatinSquare &square,
                                                        std::span<const Transversal> ts);

// For each column j, the cell (i,j) of p with p[i][j] = q[r][j].  Cells are
// returned in column order.  Throws std::invalid_argument on order mismatch.
std::vector<Cell> trp_row_cells(const LatinSquare &p, const LatinSquare &q, int r);

// True iff every row of q selects cells of p lying in pairwise-distinct rows,
// i.e. each row of q represents a transversal of p.
bool verify_trp(const LatinSquare &p, const LatinSquare &q);

enum class CellColour : std::uint8_t { White, Light, Dark };

enum class ColourErrorKind { WrongOrder, DarkOnWhiteCell, WrongDarkQuota };
struct ColourError {
    ColourErrorKind kind;
    int column = -1;
    Cell cell{};
};

// Cell colouring of an order-10 square: white = symbol in {0,1,2,3}, and in
// each of the first six columns exactly two nonwhite cells are dark.
class MyrvoldColouring {
public:
    static constexpr int kOrder = 10;

    static MyrvoldColouring unchecked(std::array<CellColour, kOrder * kOrder> grid);

    CellColour at(int row, int col) const { return grid_[static_cast<std::size_t>(row) * kOrder + col]; }
    std::vector<Cell> dark_cells() const;

private:
    MyrvoldColouring() = default;
    std::array<CellColour, kOrder * kOrder> grid_{};
    friend Expected<MyrvoldColouring, ColourError> colour(const LatinSquare &, std::span<const Cell>);
};

Expected<MyrvoldColouring, ColourError> colour(const LatinSquare &square,
                                               std::span<const Cell> dark_positions);

// Transversal type p_i: exactly i white entries in the last four columns and
// exactly 2i-2 dark entries.
enum class TransversalType : int { p1 = 1, p2 = 2, p3 = 3, p4 = 4 };

struct InconsistentType {
    int white_last_four = 0;
    int dark_count = 0;
};

Expected<TransversalType, InconsistentType> classify_transversal(const Transversal &t,
                                                                 const MyrvoldColouring &colouring);

// Required count per transversal type plus the per-column dark quotas for the
// first six columns.  Only the R and XX presets carry published counts; other
// profiles are caller-supplied.
struct MyrvoldProfile {
    std::array<int, 4> type_counts{};  // index i-1 holds the required count of p_i
    std::array<int, 6> dark_quota{2, 2, 2, 2, 2, 2};
    std::optional<std::string> omega_filter;  // registry id; absent = single all-pass class

    int count(TransversalType t) const { return type_counts[static_cast<int>(t) - 1]; }
    int total() const { return type_counts[0] + type_counts[1] + type_counts[2] + type_counts[3]; }

    static MyrvoldProfile preset_r() { return {{8, 0, 0, 2}, {2, 2, 2, 2, 2, 2}, std::nullopt}; }
    static MyrvoldProfile preset_xx() { return {{4, 6, 0, 0}, {2, 2, 2, 2, 2, 2}, std::nullopt}; }
    static std::optional<MyrvoldProfile> preset(const std::string &name);
};

// --- text formats -----------------------------------------------------------
//
// Square file: line 1 is "order n", followed by n rows of n symbols.
// Dark-cell sidecar: 12 lines "row col".

struct ParseError {
    std::string what;
};

Expected<LatinSquare, ParseError> read_square(std::istream &in);
void write_square(std::ostream &out, const LatinSquare &square);
Expected<std::vector<Cell>, ParseError> read_dark_cells(std::istream &in);
void write_dark_cells(std::ostream &out, std::span<const Cell> cells);

Expected<LatinSquare, ParseError> read_square_file(const std::string &path);
bool write_square_file(const std::string &path, const LatinSquare &square);

} // namespace mols
