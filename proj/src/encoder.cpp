#include "mols/encoder.hpp"

#include <algorithm>
#include <cassert>
#include <ostream>
#include <stdexcept>

namespace mols::enc {

const char *square_name(SquareId id) {
    switch (id) {
    case SquareId::P: return "P";
    case SquareId::R: return "R";
    case SquareId::Q: return "Q";
    }
    return "?";
}

VariableMap::VariableMap(int order, std::vector<SquareId> squares)
    : order_(order), squares_(std::move(squares)) {}

bool VariableMap::declares(SquareId id) const {
    return std::find(squares_.begin(), squares_.end(), id) != squares_.end();
}

int VariableMap::square_var_begin(SquareId id) const {
    const int block = order_ * order_ * order_;
    for (std::size_t s = 0; s < squares_.size(); ++s)
        if (squares_[s] == id)
            return static_cast<int>(s) * block + 1;
    throw std::invalid_argument("square not declared");
}

int VariableMap::var(SquareId id, int i, int j, int k) const {
    return square_var_begin(id) + (i * order_ + j) * order_ + k;
}

void VariableMap::register_white_block(SquareId id, int base) { white_base_[id] = base; }
void VariableMap::register_dark_block(SquareId id, int base) { dark_base_[id] = base; }

int VariableMap::white_var(SquareId id, int i, int j) const {
    const auto it = white_base_.find(id);
    if (it == white_base_.end())
        return 0;
    return it->second + i * order_ + j;
}

int VariableMap::dark_var(SquareId id, int i, int c) const {
    const auto it = dark_base_.find(id);
    if (it == dark_base_.end())
        return 0;
    return it->second + i * 6 + c;
}

bool VariableMap::has_dark_block(SquareId id) const { return dark_base_.count(id) != 0; }

void VariableMap::write_sidecar(std::ostream &out) const {
    for (SquareId id : squares_)
        for (int i = 0; i < order_; ++i)
            for (int j = 0; j < order_; ++j)
                for (int k = 0; k < order_; ++k)
                    out << square_name(id) << ' ' << i << ' ' << j << ' ' << k << ' '
                        << var(id, i, j, k) << '\n';
    for (const auto &[id, base] : white_base_)
        for (int i = 0; i < order_; ++i)
            for (int j = 0; j < order_; ++j)
                out << "white " << square_name(id) << ' ' << i << ' ' << j << ' '
                    << white_var(id, i, j) << '\n';
    for (const auto &[id, base] : dark_base_)
        for (int i = 0; i < order_; ++i)
            for (int c = 0; c < 6; ++c)
                out << "dark " << square_name(id) << ' ' << i << ' ' << c << ' '
                    << dark_var(id, i, c) << '\n';
}

namespace {

// Unary counter outputs for the literals: out[s-1] true iff at least s of the
// inputs are true.  Outputs beyond `cap` are clamped onto out[cap-1].
std::vector<Lit> totalizer(Cnf &cnf, std::span<const Lit> lits, int cap) {
    assert(cap >= 1);
    if (lits.size() == 1)
        return {lits[0]};
    const std::size_t half = lits.size() / 2;
    const std::vector<Lit> left = totalizer(cnf, lits.subspan(0, half), cap);
    const std::vector<Lit> right = totalizer(cnf, lits.subspan(half), cap);
    const int m = std::min(static_cast<int>(lits.size()), cap);
    std::vector<Lit> out(static_cast<std::size_t>(m));
    for (Lit &o : out)
        o = cnf.new_var();

    const int nl = static_cast<int>(left.size());
    const int nr = static_cast<int>(right.size());
    // counts combine upward: a true from the left and b from the right force
    // output a+b (clamped)
    for (int a = 0; a <= nl; ++a)
        for (int b = 0; b <= nr; ++b) {
            const int s = a + b;
            if (s < 1)
                continue;
            Clause cl;
            if (a > 0)
                cl.push_back(-left[static_cast<std::size_t>(a - 1)]);
            if (b > 0)
                cl.push_back(-right[static_cast<std::size_t>(b - 1)]);
            cl.push_back(out[static_cast<std::size_t>(std::min(s, m) - 1)]);
            cnf.add(std::move(cl));
        }
    // and downward: output s needs a justifying split a + b = s
    for (int a = 0; a <= nl; ++a)
        for (int b = 0; b <= nr; ++b) {
            const int s = a + b + 1;
            if (s > m)
                continue;
            Clause cl{-out[static_cast<std::size_t>(s - 1)]};
            if (a + 1 <= nl)
                cl.push_back(left[static_cast<std::size_t>(a)]);
            if (b + 1 <= nr)
                cl.push_back(right[static_cast<std::size_t>(b)]);
            assert(cl.size() >= 2);
            cnf.add(std::move(cl));
        }
    for (int s = 1; s < m; ++s)
        cnf.add({-out[static_cast<std::size_t>(s)], out[static_cast<std::size_t>(s - 1)]});
    return out;
}

} // namespace

void add_cardinality_equal(Cnf &cnf, std::span<const Lit> lits, int k) {
    assert(k >= 0 && k <= static_cast<int>(lits.size()));
    if (k == 0) {
        for (Lit l : lits)
            cnf.add_unit(-l);
        return;
    }
    const int cap = std::min(static_cast<int>(lits.size()), k + 1);
    const std::vector<Lit> out = totalizer(cnf, lits, cap);
    cnf.add_unit(out[static_cast<std::size_t>(k - 1)]);
    if (static_cast<int>(out.size()) >= k + 1)
        cnf.add_unit(-out[static_cast<std::size_t>(k)]);
}

void add_exactly_one(Cnf &cnf, std::span<const Lit> lits, CardinalityKind kind) {
    assert(!lits.empty());
    if (kind == CardinalityKind::Pairwise) {
        cnf.add(Clause(lits.begin(), lits.end()));
        for (std::size_t a = 0; a < lits.size(); ++a)
            for (std::size_t b = a + 1; b < lits.size(); ++b)
                cnf.add({-lits[a], -lits[b]});
        return;
    }
    add_cardinality_equal(cnf, lits, 1);
}

namespace {

void add_latin_constraints(Cnf &cnf, const VariableMap &map, SquareId id, CardinalityKind kind) {
    const int n = map.order();
    std::vector<Lit> lits(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k)
                lits[static_cast<std::size_t>(k)] = map.var(id, i, j, k);
            add_exactly_one(cnf, lits, kind);  // one symbol per cell
        }
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            for (int j = 0; j < n; ++j)
                lits[static_cast<std::size_t>(j)] = map.var(id, i, j, k);
            add_exactly_one(cnf, lits, kind);  // symbol k once in row i
        }
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            for (int i = 0; i < n; ++i)
                lits[static_cast<std::size_t>(i)] = map.var(id, i, j, k);
            add_exactly_one(cnf, lits, kind);  // symbol k once in column j
        }
}

void add_first_row_units(Cnf &cnf, const VariableMap &map, std::span<const int> row) {
    for (int j = 0; j < map.order(); ++j)
        cnf.add_unit(map.var(SquareId::P, 0, j, row[static_cast<std::size_t>(j)]));
}

// (R[i][j]=k and P[i][j]=l) -> Q[k][j]=l, plus each symbol exactly once per
// row of Q.  Q's rows then spell out the symbols of P along the cells where R
// holds a fixed symbol, which is exactly the transversal decomposition.
void add_channeling(Cnf &cnf, const VariableMap &map, CardinalityKind kind) {
    const int n = map.order();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    cnf.add({-map.var(SquareId::R, i, j, k), -map.var(SquareId::P, i, j, l),
                             map.var(SquareId::Q, k, j, l)});
    std::vector<Lit> lits(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
            for (int j = 0; j < n; ++j)
                lits[static_cast<std::size_t>(j)] = map.var(SquareId::Q, k, j, l);
            add_exactly_one(cnf, lits, kind);
        }
}

void add_myrvold_layers(Cnf &cnf, VariableMap &map, SquareId id, const MyrvoldProfile &profile,
                        CardinalityKind kind) {
    const int n = map.order();
    assert(n == MyrvoldColouring::kOrder);

    // white indicator w <-> symbol in {0,1,2,3}
    const int white_base = cnf.num_vars + 1;
    for (int i = 0; i < n * n; ++i)
        cnf.new_var();
    map.register_white_block(id, white_base);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Lit w = map.white_var(id, i, j);
            Clause def{-w};
            for (int k = 0; k <= 3; ++k) {
                cnf.add({-map.var(id, i, j, k), w});
                def.push_back(map.var(id, i, j, k));
            }
            cnf.add(std::move(def));
        }

    // dark indicators: free choices over nonwhite cells of the first six
    // columns, two per column
    const int dark_base = cnf.num_vars + 1;
    for (int i = 0; i < n * 6; ++i)
        cnf.new_var();
    map.register_dark_block(id, dark_base);
    std::vector<Lit> column(static_cast<std::size_t>(n));
    for (int c = 0; c < 6; ++c) {
        for (int i = 0; i < n; ++i) {
            const Lit d = map.dark_var(id, i, c);
            cnf.add({-d, -map.white_var(id, i, c)});
            column[static_cast<std::size_t>(i)] = d;
        }
        add_cardinality_equal(cnf, column, profile.dark_quota[static_cast<std::size_t>(c)]);
    }

    // per-row type selectors tied to the white count of the last four columns
    std::vector<int> present;
    for (int t = 1; t <= 4; ++t)
        if (profile.type_counts[static_cast<std::size_t>(t - 1)] > 0)
            present.push_back(t);
    assert(!present.empty());
    std::vector<std::vector<Lit>> selector_of_type(static_cast<std::size_t>(5));
    for (int r = 0; r < n; ++r) {
        std::vector<Lit> whites;
        for (int j = 6; j < 10; ++j)
            whites.push_back(map.white_var(id, r, j));
        const std::vector<Lit> count = totalizer(cnf, whites, 4);
        std::vector<Lit> row_selectors;
        for (int t : present) {
            const Lit sel = cnf.new_var();
            row_selectors.push_back(sel);
            selector_of_type[static_cast<std::size_t>(t)].push_back(sel);
            cnf.add({-sel, count[static_cast<std::size_t>(t - 1)]});
            if (t < 4)
                cnf.add({-sel, -count[static_cast<std::size_t>(t)]});
        }
        add_exactly_one(cnf, row_selectors, kind);
    }
    for (int t : present)
        add_cardinality_equal(cnf, selector_of_type[static_cast<std::size_t>(t)],
                              profile.type_counts[static_cast<std::size_t>(t - 1)]);
}

} // namespace

Encoded encode_latin(const EncodeConfig &cfg) {
    VariableMap map(cfg.order, {SquareId::P});
    Cnf cnf;
    cnf.num_vars = map.square_var_count();
    add_latin_constraints(cnf, map, SquareId::P, cfg.cardinality);
    if (cfg.fixed_first_row)
        add_first_row_units(cnf, map, *cfg.fixed_first_row);
    return {std::move(cnf), std::move(map)};
}

Encoded encode_orthogonality_channeling(const EncodeConfig &cfg) {
    VariableMap map(cfg.order, {SquareId::P, SquareId::R, SquareId::Q});
    Cnf cnf;
    cnf.num_vars = map.square_var_count();
    add_latin_constraints(cnf, map, SquareId::P, cfg.cardinality);
    add_latin_constraints(cnf, map, SquareId::R, cfg.cardinality);
    add_channeling(cnf, map, cfg.cardinality);
    if (cfg.fixed_first_row)
        add_first_row_units(cnf, map, *cfg.fixed_first_row);
    return {std::move(cnf), std::move(map)};
}

Encoded encode_myrvold(const EncodeConfig &cfg) {
    if (!cfg.profile)
        throw std::invalid_argument("encode_myrvold: profile required");
    std::vector<SquareId> squares{SquareId::P, SquareId::Q};
    if (cfg.myrvold_channel_r)
        squares = {SquareId::P, SquareId::R, SquareId::Q};
    VariableMap map(cfg.order, squares);
    Cnf cnf;
    cnf.num_vars = map.square_var_count();
    add_latin_constraints(cnf, map, SquareId::P, cfg.cardinality);
    add_latin_constraints(cnf, map, SquareId::Q, cfg.cardinality);
    if (cfg.myrvold_channel_r) {
        add_latin_constraints(cnf, map, SquareId::R, cfg.cardinality);
        add_channeling(cnf, map, cfg.cardinality);
    }
    add_myrvold_layers(cnf, map, SquareId::P, *cfg.profile, cfg.cardinality);
    add_myrvold_layers(cnf, map, SquareId::Q, *cfg.profile, cfg.cardinality);
    if (cfg.fixed_first_row)
        add_first_row_units(cnf, map, *cfg.fixed_first_row);
    return {std::move(cnf), std::move(map)};
}

Encoded encode(const EncodeConfig &cfg) {
    switch (cfg.mode) {
    case EncodeMode::SingleSquare: return encode_latin(cfg);
    case EncodeMode::PairWithChanneling: return encode_orthogonality_channeling(cfg);
    case EncodeMode::MyrvoldPair: return encode_myrvold(cfg);
    }
    throw std::invalid_argument("encode: bad mode");
}

Expected<LatinSquare, std::string> decode_square(std::span<const Lit> model, const VariableMap &map,
                                                 SquareId id) {
    const int n = map.order();
    std::vector<std::vector<int>> grid(static_cast<std::size_t>(n), std::vector<int>(n, -1));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const int v = map.var(id, i, j, k);
                if (model[static_cast<std::size_t>(v - 1)] > 0) {
                    if (grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != -1)
                        return std::string("two symbols assigned to one cell");
                    grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = k;
                }
            }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == -1)
                return std::string("cell with no symbol");
    auto square = LatinSquare::validate(grid);
    if (!square)
        return std::string("decoded grid is not Latin");
    return square.value();
}

} // namespace mols::enc
