#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mols/cnf.hpp"
#include "mols/expected.hpp"
#include "mols/latin.hpp"

namespace mols::enc {

enum class SquareId : int { P = 0, R = 1, Q = 2 };
const char *square_name(SquareId id);

enum class EncodeMode { SingleSquare, PairWithChanneling, MyrvoldPair };
enum class CardinalityKind { Pairwise, Totalizer };

struct EncodeConfig {
    int order = 0;
    EncodeMode mode = EncodeMode::SingleSquare;
    CardinalityKind cardinality = CardinalityKind::Pairwise;
    std::optional<std::vector<int>> fixed_first_row;  // unit clauses on P when set
    std::optional<MyrvoldProfile> profile;            // MyrvoldPair only
    bool myrvold_channel_r = false;                   // also channel to an R square
};

// Bijection (square, i, j, k) <-> variable for the declared squares, laid out
// P block first, then R, then Q, auxiliaries strictly above.  Myrvold runs
// additionally register the white/dark indicator blocks so the driver can
// read a colouring off a model.
class VariableMap {
public:
    VariableMap(int order, std::vector<SquareId> squares);

    int order() const { return order_; }
    std::span<const SquareId> squares() const { return squares_; }
    bool declares(SquareId id) const;

    int var(SquareId id, int i, int j, int k) const;
    int square_var_begin(SquareId id) const;  // first variable of the block
    int square_var_count() const { return static_cast<int>(squares_.size()) * order_ * order_ * order_; }

    void register_white_block(SquareId id, int base);
    void register_dark_block(SquareId id, int base);
    // white indicator of cell (i, j); 0 when not registered
    int white_var(SquareId id, int i, int j) const;
    // dark indicator of cell (i, c), c < 6; 0 when not registered
    int dark_var(SquareId id, int i, int c) const;
    bool has_dark_block(SquareId id) const;

    // Sidecar: "P i j k v" per square variable plus "dark"/"white" lines for
    // registered indicator blocks.
    void write_sidecar(std::ostream &out) const;

private:
    int order_;
    std::vector<SquareId> squares_;
    std::map<SquareId, int> white_base_;
    std::map<SquareId, int> dark_base_;
};

// Exactly-one over the given literals.  Pairwise: the length-k at-least-one
// clause plus k(k-1)/2 binary at-most-one clauses.  Totalizer: a balanced
// binary tree of unary counters with the output asserted to equal one.
void add_exactly_one(Cnf &cnf, std::span<const Lit> lits, CardinalityKind kind);

// Totalizer-encoded cardinality equality sum(lits) = k.
void add_cardinality_equal(Cnf &cnf, std::span<const Lit> lits, int k);

struct Encoded {
    Cnf cnf;
    VariableMap map;
};

// Latin-square constraints for each declared square per mode, plus channeling
// or the Myrvold layers.  See the per-mode helpers below for the exact clause
// sets.
Encoded encode(const EncodeConfig &cfg);

Encoded encode_latin(const EncodeConfig &cfg);                     // SingleSquare
Encoded encode_orthogonality_channeling(const EncodeConfig &cfg);  // PairWithChanneling
Encoded encode_myrvold(const EncodeConfig &cfg);                   // MyrvoldPair

// Model decoding: model[v-1] > 0 means variable v is true.
Expected<LatinSquare, std::string> decode_square(std::span<const Lit> model, const VariableMap &map,
                                                 SquareId id);

} // namespace mols::enc
