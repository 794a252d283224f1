#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mols/cnf.hpp"
#include "mols/encoder.hpp"
#include "mols/eulerparker.hpp"
#include "mols/latin.hpp"
#include "mols/satengine.hpp"

namespace mols::hybrid {

// Tracks the cell variables of one encoded square on the trail.  Completion
// means every cell has an assigned-true symbol variable.
class SquareWatch {
public:
    SquareWatch(enc::SquareId id, const enc::VariableMap &map);

    enc::SquareId id() const { return id_; }
    int order() const { return order_; }
    bool owns_var(int var) const { return var >= base_ && var < base_ + order_ * order_ * order_; }
    bool complete() const { return assigned_cells_ == order_ * order_; }
    std::uint64_t epoch() const { return epoch_; }

    // var must be a cell variable assigned true / retracted
    void assign_true(int var);
    void retract(int var);

    int symbol_at(int row, int col) const {
        return cell_symbol_[static_cast<std::size_t>(row) * order_ + col];
    }

    // Decode the completed square; an inconsistent watch state signals an
    // encoder or solver bug.
    Expected<LatinSquare, std::string> extract() const;

private:
    enc::SquareId id_;
    int order_;
    int base_;
    std::vector<std::int8_t> cell_symbol_;  // -1 when unassigned
    int assigned_cells_ = 0;
    std::uint64_t epoch_ = 0;  // bumped whenever completeness is lost
};

// Negative literals for the upper-left (n-1)x(n-1) cells of the square: the
// final row and column are forced, so the short clause blocks the square.
std::vector<sat::Lit> blocking_clause(const LatinSquare &square, const enc::VariableMap &map,
                                      enc::SquareId id);

struct HybridConfig {
    std::uint64_t ep_conflict_throttle = 1;  // native conflicts required between EP calls
    std::vector<enc::SquareId> watched = {enc::SquareId::P};
    std::optional<MyrvoldProfile> profile;  // Myrvold-specialized EP when set
    exactcover::SolveControl ep_budget;
    std::size_t blocked_memo_size = std::size_t{1} << 20;
    std::int64_t shuffle_seed = 0;
    bool enumerate_all = false;                // keep blocking past mates, collect them
    std::optional<std::uint64_t> max_blocks;   // stop once this many squares were blocked
};

struct HybridStats {
    std::uint64_t ep_calls = 0;
    std::uint64_t ep_calls_at_model = 0;  // triggered by a solution candidate
    std::uint64_t ep_calls_drained = 0;   // post-search verification of deferred squares
    std::uint64_t blocked_squares = 0;
    std::uint64_t deferred_squares = 0;
    std::uint64_t memo_reblocks = 0;
    std::uint64_t colouring_skips = 0;
    std::uint64_t mates_found = 0;

    // blocking-clause contract counters
    std::uint64_t blocks_emitted = 0;
    std::uint64_t blocks_wrong_size = 0;
    std::uint64_t blocks_not_falsified = 0;

    // throttle bookkeeping over in-search EP calls
    std::uint64_t throttle_violations = 0;
    std::uint64_t min_native_separation = std::uint64_t(-1);

    double ep_stage1_seconds = 0.0;
    double ep_stage2_seconds = 0.0;
    double sat_seconds = 0.0;
    double total_seconds = 0.0;
};

enum class HybridStatus { Found, Unsat, Timeout };

struct HybridResult {
    HybridStatus status = HybridStatus::Timeout;
    std::optional<LatinSquare> square;  // the completed square that succeeded
    std::optional<LatinSquare> mate;
    std::optional<MyrvoldColouring> colouring;  // Myrvold runs: read off the model
    std::vector<Transversal> transversals;
    enc::SquareId triggered = enc::SquareId::P;
    bool found_by_drain = false;
    std::vector<std::pair<LatinSquare, LatinSquare>> enumerated;  // enumerate_all mode
    HybridStats stats;
    sat::Stats engine;
};

// Attaches the Euler-Parker propagator to a fresh engine over the instance
// and runs it: completed watched squares are checked for an orthogonal mate,
// mateless squares are blocked, and the first mate ends the run.
HybridResult run_hybrid(const enc::Cnf &cnf, const enc::VariableMap &map, const HybridConfig &cfg,
                        const sat::Limits &limits = {});

// Per-run record in the shape of the bench CSV columns.
std::string stats_record(const HybridResult &result, std::int64_t seed, const std::string &mode,
                         const std::string &pair_type);

} // namespace mols::hybrid
