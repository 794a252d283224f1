#include "mols/latin.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mols {

LatinSquare::LatinSquare(int order, std::vector<std::uint8_t> cells)
    : order_(order), cells_(std::move(cells)) {}

Expected<LatinSquare, SquareError> LatinSquare::validate(const std::vector<std::vector<int>> &grid) {
    const int n = static_cast<int>(grid.size());
    if (n < 1 || n > kMaxOrder)
        return SquareError{SquareErrorKind::BadShape, n, -1};
    for (const auto &row : grid)
        if (static_cast<int>(row.size()) != n)
            return SquareError{SquareErrorKind::BadShape, n, -1};

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (grid[i][j] < 0 || grid[i][j] >= n)
                return SquareError{SquareErrorKind::BadSymbol, i, grid[i][j]};

    for (int i = 0; i < n; ++i) {
        std::uint64_t seen = 0;
        for (int j = 0; j < n; ++j) {
            const std::uint64_t bit = 1ull << grid[i][j];
            if (seen & bit)
                return SquareError{SquareErrorKind::DuplicateInRow, i, grid[i][j]};
            seen |= bit;
        }
    }
    for (int j = 0; j < n; ++j) {
        std::uint64_t seen = 0;
        for (int i = 0; i < n; ++i) {
            const std::uint64_t bit = 1ull << grid[i][j];
            if (seen & bit)
                return SquareError{SquareErrorKind::DuplicateInCol, j, grid[i][j]};
            seen |= bit;
        }
    }

    std::vector<std::uint8_t> cells(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cells[static_cast<std::size_t>(i) * n + j] = static_cast<std::uint8_t>(grid[i][j]);
    return LatinSquare(n, std::move(cells));
}

LatinSquare LatinSquare::unchecked(std::vector<std::vector<int>> grid) {
    const int n = static_cast<int>(grid.size());
    std::vector<std::uint8_t> cells(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cells[static_cast<std::size_t>(i) * n + j] = static_cast<std::uint8_t>(grid[i][j]);
    return LatinSquare(n, std::move(cells));
}

std::vector<int> LatinSquare::row(int r) const {
    std::vector<int> out(order_);
    for (int j = 0; j < order_; ++j)
        out[j] = at(r, j);
    return out;
}

int LatinSquare::row_of_symbol_in_col(int symbol, int col) const {
    for (int i = 0; i < order_; ++i)
        if (at(i, col) == symbol)
            return i;
    return -1;
}

std::size_t LatinSquare::hash() const {
    // FNV-1a over the cell bytes.
    std::size_t h = 1469598103934665603ull;
    for (std::uint8_t b : cells_) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h ^ static_cast<std::size_t>(order_);
}

std::string LatinSquare::reduced_key() const {
    std::string key;
    key.reserve(static_cast<std::size_t>(order_ - 1) * (order_ - 1) + 1);
    key.push_back(static_cast<char>(order_));
    for (int i = 0; i + 1 < order_; ++i)
        for (int j = 0; j + 1 < order_; ++j)
            key.push_back(static_cast<char>(at(i, j)));
    return key;
}

Expected<LatinSquare, SquareError> validate_square(const std::vector<std::vector<int>> &grid) {
    return LatinSquare::validate(grid);
}

Transversal::Transversal(int order, std::vector<Cell> cells)
    : order_(order), cells_(std::move(cells)) {}

Expected<Transversal, TransversalError> Transversal::from_cells(int order, std::vector<Cell> cells) {
    if (static_cast<int>(cells.size()) != order)
        return TransversalError{"cell count differs from order"};
    std::sort(cells.begin(), cells.end());
    std::uint64_t cols = 0;
    for (int r = 0; r < order; ++r) {
        const Cell &c = cells[static_cast<std::size_t>(r)];
        if (c.row != r)
            return TransversalError{"rows are not a permutation"};
        if (c.col < 0 || c.col >= order)
            return TransversalError{"column out of range"};
        const std::uint64_t bit = 1ull << c.col;
        if (cols & bit)
            return TransversalError{"columns repeat"};
        cols |= bit;
    }
    return Transversal(order, std::move(cells));
}

Transversal Transversal::unchecked(int order, std::vector<Cell> cells) {
    std::sort(cells.begin(), cells.end());
    return Transversal(order, std::move(cells));
}

bool Transversal::contains(Cell c) const {
    if (c.row < 0 || c.row >= order_)
        return false;
    return cells_[static_cast<std::size_t>(c.row)].col == c.col;
}

bool is_transversal(const LatinSquare &square, std::span<const Cell> cells) {
    const int n = square.order();
    if (static_cast<int>(cells.size()) != n)
        return false;
    std::uint64_t rows = 0, cols = 0, syms = 0;
    for (const Cell &c : cells) {
        if (c.row < 0 || c.row >= n || c.col < 0 || c.col >= n)
            return false;
        const std::uint64_t rbit = 1ull << c.row;
        const std::uint64_t cbit = 1ull << c.col;
        const std::uint64_t sbit = 1ull << square.at(c.row, c.col);
        if ((rows & rbit) || (cols & cbit) || (syms & sbit))
            return false;
        rows |= rbit;
        cols |= cbit;
        syms |= sbit;
    }
    return true;
}

bool are_orthogonal(const LatinSquare &a, const LatinSquare &b) {
    if (a.order() != b.order())
        throw std::invalid_argument("are_orthogonal: order mismatch");
    const int n = a.order();
    std::vector<bool> seen(static_cast<std::size_t>(n) * n, false);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::size_t pair = static_cast<std::size_t>(a.at(i, j)) * n + b.at(i, j);
            if (seen[pair])
                return false;
            seen[pair] = true;
        }
    return true;
}

Expected<LatinSquare, MateError> mate_from_transversals(const LatinSquare &square,
                                                        std::span<const Transversal> ts) {
    const int n = square.order();
    std::vector<std::vector<int>> grid(static_cast<std::size_t>(n), std::vector<int>(n, -1));
    for (int k = 0; k < static_cast<int>(ts.size()); ++k)
        for (const Cell &c : ts[static_cast<std::size_t>(k)].cells()) {
            if (grid[c.row][c.col] != -1)
                return MateError{MateErrorKind::NotDisjoint, c};
            grid[c.row][c.col] = k;
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (grid[i][j] == -1)
                return MateError{MateErrorKind::NotCovering, Cell{i, j}};
    return LatinSquare::unchecked(std::move(grid));
}

std::vector<Cell> trp_row_cells(const LatinSquare &p, const LatinSquare &q, int r) {
    if (p.order() != q.order())
        throw std::invalid_argument("trp_row_cells: order mismatch");
    const int n = p.order();
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        cells.push_back(Cell{p.row_of_symbol_in_col(q.at(r, j), j), j});
    return cells;
}

bool verify_trp(const LatinSquare &p, const LatinSquare &q) {
    if (p.order() != q.order())
        throw std::invalid_argument("verify_trp: order mismatch");
    const int n = p.order();
    for (int r = 0; r < n; ++r) {
        std::uint64_t rows = 0;
        for (const Cell &c : trp_row_cells(p, q, r)) {
            const std::uint64_t bit = 1ull << c.row;
            if (rows & bit)
                return false;
            rows |= bit;
        }
    }
    return true;
}

MyrvoldColouring MyrvoldColouring::unchecked(std::array<CellColour, kOrder * kOrder> grid) {
    MyrvoldColouring c;
    c.grid_ = grid;
    return c;
}

std::vector<Cell> MyrvoldColouring::dark_cells() const {
    std::vector<Cell> out;
    for (int i = 0; i < kOrder; ++i)
        for (int j = 0; j < kOrder; ++j)
            if (at(i, j) == CellColour::Dark)
                out.push_back(Cell{i, j});
    return out;
}

Expected<MyrvoldColouring, ColourError> colour(const LatinSquare &square,
                                               std::span<const Cell> dark_positions) {
    if (square.order() != MyrvoldColouring::kOrder)
        return ColourError{ColourErrorKind::WrongOrder};
    MyrvoldColouring out;
    for (int i = 0; i < MyrvoldColouring::kOrder; ++i)
        for (int j = 0; j < MyrvoldColouring::kOrder; ++j)
            out.grid_[static_cast<std::size_t>(i) * MyrvoldColouring::kOrder + j] =
                square.at(i, j) <= 3 ? CellColour::White : CellColour::Light;

    std::array<int, MyrvoldColouring::kOrder> per_column{};
    for (const Cell &c : dark_positions) {
        if (c.row < 0 || c.row >= MyrvoldColouring::kOrder || c.col < 0 ||
            c.col >= MyrvoldColouring::kOrder)
            return ColourError{ColourErrorKind::WrongDarkQuota, c.col, c};
        if (square.at(c.row, c.col) <= 3)
            return ColourError{ColourErrorKind::DarkOnWhiteCell, c.col, c};
        auto &slot = out.grid_[static_cast<std::size_t>(c.row) * MyrvoldColouring::kOrder + c.col];
        if (slot == CellColour::Dark)  // repeated position
            return ColourError{ColourErrorKind::WrongDarkQuota, c.col, c};
        slot = CellColour::Dark;
        per_column[static_cast<std::size_t>(c.col)]++;
    }
    for (int j = 0; j < MyrvoldColouring::kOrder; ++j) {
        const int want = j < 6 ? 2 : 0;
        if (per_column[static_cast<std::size_t>(j)] != want)
            return ColourError{ColourErrorKind::WrongDarkQuota, j};
    }
    return out;
}

Expected<TransversalType, InconsistentType> classify_transversal(const Transversal &t,
                                                                 const MyrvoldColouring &colouring) {
    int white_last_four = 0;
    int dark = 0;
    for (const Cell &c : t.cells()) {
        const CellColour col = colouring.at(c.row, c.col);
        if (col == CellColour::White && c.col >= 6)
            ++white_last_four;
        if (col == CellColour::Dark)
            ++dark;
    }
    if (white_last_four < 1 || white_last_four > 4 || dark != 2 * white_last_four - 2)
        return InconsistentType{white_last_four, dark};
    return static_cast<TransversalType>(white_last_four);
}

std::optional<MyrvoldProfile> MyrvoldProfile::preset(const std::string &name) {
    if (name == "R")
        return preset_r();
    if (name == "XX")
        return preset_xx();
    return std::nullopt;
}

Expected<LatinSquare, ParseError> read_square(std::istream &in) {
    std::string tag;
    int n = 0;
    if (!(in >> tag >> n) || tag != "order")
        return ParseError{"expected header \"order n\""};
    if (n < 1 || n > kMaxOrder)
        return ParseError{"order out of range"};
    std::vector<std::vector<int>> grid(static_cast<std::size_t>(n), std::vector<int>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!(in >> grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]))
                return ParseError{"truncated square body"};
    auto square = LatinSquare::validate(grid);
    if (!square)
        return ParseError{"grid is not a Latin square"};
    return square.value();
}

void write_square(std::ostream &out, const LatinSquare &square) {
    out << "order " << square.order() << '\n';
    for (int i = 0; i < square.order(); ++i) {
        for (int j = 0; j < square.order(); ++j)
            out << (j ? " " : "") << square.at(i, j);
        out << '\n';
    }
}

Expected<std::vector<Cell>, ParseError> read_dark_cells(std::istream &in) {
    std::vector<Cell> cells;
    int r = 0, c = 0;
    while (in >> r >> c)
        cells.push_back(Cell{r, c});
    if (cells.size() != 12)
        return ParseError{"expected 12 \"row col\" lines"};
    return cells;
}

void write_dark_cells(std::ostream &out, std::span<const Cell> cells) {
    for (const Cell &c : cells)
        out << c.row << ' ' << c.col << '\n';
}

Expected<LatinSquare, ParseError> read_square_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        return ParseError{"cannot open " + path};
    return read_square(in);
}

bool write_square_file(const std::string &path, const LatinSquare &square) {
    std::ofstream out(path);
    if (!out)
        return false;
    write_square(out, square);
    return static_cast<bool>(out);
}

} // namespace mols
