#include "mols/hybrid.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <chrono>
#include <deque>
#include <list>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace mols::hybrid {

SquareWatch::SquareWatch(enc::SquareId id, const enc::VariableMap &map)
    : id_(id), order_(map.order()), base_(map.square_var_begin(id)),
      cell_symbol_(static_cast<std::size_t>(map.order()) * map.order(), -1) {}

void SquareWatch::assign_true(int var) {
    const int offset = var - base_;
    const int k = offset % order_;
    const int cell = offset / order_;
    assert(cell_symbol_[static_cast<std::size_t>(cell)] == -1);
    cell_symbol_[static_cast<std::size_t>(cell)] = static_cast<std::int8_t>(k);
    ++assigned_cells_;
}

void SquareWatch::retract(int var) {
    const int offset = var - base_;
    const int cell = offset / order_;
    if (complete())
        ++epoch_;
    assert(cell_symbol_[static_cast<std::size_t>(cell)] != -1);
    cell_symbol_[static_cast<std::size_t>(cell)] = -1;
    --assigned_cells_;
}

Expected<LatinSquare, std::string> SquareWatch::extract() const {
    if (!complete())
        return std::string("square watch is not complete");
    std::vector<std::vector<int>> grid(static_cast<std::size_t>(order_),
                                       std::vector<int>(order_));
    for (int i = 0; i < order_; ++i)
        for (int j = 0; j < order_; ++j)
            grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = symbol_at(i, j);
    auto square = LatinSquare::validate(grid);
    if (!square)
        return std::string("decoded watch state is not a Latin square");
    return square.value();
}

std::vector<sat::Lit> blocking_clause(const LatinSquare &square, const enc::VariableMap &map,
                                      enc::SquareId id) {
    const int n = square.order();
    std::vector<sat::Lit> lits;
    lits.reserve(static_cast<std::size_t>(n - 1) * (n - 1));
    for (int i = 0; i + 1 < n; ++i)
        for (int j = 0; j + 1 < n; ++j)
            lits.push_back(-map.var(id, i, j, square.at(i, j)));
    return lits;
}

namespace {

struct EpVerdict {
    bool has_mate = false;
    std::optional<LatinSquare> mate;
    std::vector<Transversal> transversals;
};

// LRU keyed by the reduced square bytes; tracks how often an already-blocked
// square shows up again after its clause was dropped.
class BlockedMemo {
public:
    explicit BlockedMemo(std::size_t capacity) : capacity_(capacity) {}

    bool seen_before(const std::string &key) {
        const auto it = index_.find(key);
        if (it == index_.end())
            return false;
        order_.splice(order_.begin(), order_, it->second);
        return true;
    }

    void insert(const std::string &key) {
        if (index_.count(key))
            return;
        order_.push_front(key);
        index_[key] = order_.begin();
        if (index_.size() > capacity_) {
            index_.erase(order_.back());
            order_.pop_back();
        }
    }

private:
    std::size_t capacity_;
    std::list<std::string> order_;
    std::unordered_map<std::string, std::list<std::string>::iterator> index_;
};

// Snapshot of a completed-but-unverified square rejected while the conflict
// throttle was closed; verified later (or before concluding unsat).
struct Deferred {
    LatinSquare square;
    std::optional<MyrvoldColouring> colouring;
    enc::SquareId side;
};

class EpPropagator final : public sat::ExternalPropagator {
public:
    EpPropagator(const enc::VariableMap &map, const HybridConfig &cfg, const sat::Stats &engine,
                 std::atomic<bool> &stop, const std::atomic<bool> *caller_stop)
        : map_(map), cfg_(cfg), engine_(engine), stop_(stop), caller_stop_(caller_stop),
          memo_(cfg.blocked_memo_size) {
        for (const enc::SquareId id : cfg.watched) {
            watches_.emplace_back(id, map);
            if (cfg_.profile && map_.has_dark_block(id))
                dark_.push_back(DarkWatch{map_.dark_var(id, 0, 0),
                                          std::vector<std::int8_t>(60, -1), 0});
            else
                dark_.push_back(DarkWatch{0, {}, 0});
            processed_.push_back(ProcessedState{});
        }
    }

    // ---- callbacks --------------------------------------------------------
    void on_assign(sat::Lit lit, int level) override {
        const int var = sat::var_of(lit);
        for (std::size_t w = 0; w < watches_.size(); ++w) {
            if (watches_[w].owns_var(var)) {
                if (lit > 0) {
                    watches_[w].assign_true(var);
                    records_.push_back({level, static_cast<int>(w), var, RecordKind::Cell});
                }
                return;
            }
            DarkWatch &dw = dark_[w];
            if (dw.base != 0 && var >= dw.base && var < dw.base + 60) {
                const int slot = var - dw.base;
                assert(dw.state[static_cast<std::size_t>(slot)] == -1);
                dw.state[static_cast<std::size_t>(slot)] = lit > 0 ? 1 : 0;
                ++dw.assigned;
                records_.push_back({level, static_cast<int>(w), var, RecordKind::Dark});
                return;
            }
        }
    }

    void on_backtrack(int new_level) override {
        while (!records_.empty() && records_.back().level > new_level) {
            const Record r = records_.back();
            records_.pop_back();
            if (r.kind == RecordKind::Cell) {
                watches_[static_cast<std::size_t>(r.watch)].retract(r.var);
            } else {
                DarkWatch &dw = dark_[static_cast<std::size_t>(r.watch)];
                dw.state[static_cast<std::size_t>(r.var - dw.base)] = -1;
                --dw.assigned;
            }
        }
    }

    bool has_external_clause() override {
        if (caller_stop_ && caller_stop_->load(std::memory_order_relaxed))
            stop_.store(true, std::memory_order_relaxed);
        if (!stash_.empty())
            return true;
        if (done())
            return false;
        drain_deferred_if_open();
        if (done())
            return false;
        for (std::size_t w = 0; w < watches_.size(); ++w) {
            if (!watch_ready(w))
                continue;
            if (processed_[w].epoch == watches_[w].epoch() && processed_[w].valid)
                continue;
            if (!gate_open())
                continue;
            check_square(w, /*at_model=*/false);
            if (done())
                return !stash_.empty();
        }
        return !stash_.empty();
    }

    std::vector<sat::Lit> fetch_external_clause() override {
        assert(!stash_.empty());
        std::vector<sat::Lit> out = std::move(stash_.front());
        stash_.pop_front();
        return out;
    }

    ModelVerdict on_solution_check(std::span<const sat::Lit> model) override {
        (void)model;
        if (found_ && !cfg_.enumerate_all)
            return {true, {}};
        for (std::size_t w = 0; w < watches_.size(); ++w) {
            assert(watches_[w].complete());
            if (processed_[w].valid && processed_[w].epoch == watches_[w].epoch()) {
                if (processed_[w].has_mate && !cfg_.enumerate_all)
                    return {true, {}};
                // blocked square reappeared: its clause must have been reduced
                ++stats_.memo_reblocks;
                return {false, emit_block(processed_[w].square_key_square.value(), w)};
            }
            if (!watch_ready(w))
                continue;  // dark indicators incomplete can't happen at a model
            if (gate_open()) {
                ++stats_.ep_calls_at_model;
                const bool mate = check_square(w, /*at_model=*/true);
                if (mate && !cfg_.enumerate_all)
                    return {true, {}};
                std::vector<sat::Lit> clause = take_stashed_block();
                if (!clause.empty())
                    return {false, std::move(clause)};
                continue;  // enumerate mode with mate already blocked via stash? handled above
            }
            // throttle closed: reject now, verify later
            auto square = watches_[w].extract();
            if (!square.ok())
                throw std::logic_error(square.error());
            Deferred d{square.value(), read_colouring(w), watches_[w].id()};
            deferred_.push_back(std::move(d));
            ++stats_.deferred_squares;
            return {false, emit_block(deferred_.back().square, w)};
        }
        if (found_)
            return {true, {}};
        // No watched square could be processed; reject via the first watch to
        // keep the search moving.
        auto square = watches_[0].extract();
        if (!square.ok())
            throw std::logic_error(square.error());
        deferred_.push_back(Deferred{square.value(), read_colouring(0), watches_[0].id()});
        ++stats_.deferred_squares;
        return {false, emit_block(deferred_.back().square, 0)};
    }

    // ---- driver-facing state ------------------------------------------------
    bool found() const { return found_; }
    const std::optional<LatinSquare> &found_square() const { return found_square_; }
    const std::optional<LatinSquare> &found_mate() const { return found_mate_; }
    const std::optional<MyrvoldColouring> &found_colouring() const { return found_colouring_; }
    const std::vector<Transversal> &found_transversals() const { return found_transversals_; }
    enc::SquareId triggered() const { return triggered_; }
    HybridStats &stats() { return stats_; }
    std::vector<std::pair<LatinSquare, LatinSquare>> &enumerated() { return enumerated_; }

    // Post-search: verify whichever rejected squares were never EP-checked.
    bool drain_all_deferred() {
        while (!deferred_.empty()) {
            const Deferred d = std::move(deferred_.front());
            deferred_.pop_front();
            ++stats_.ep_calls_drained;
            const EpVerdict v = run_ep(d.square, d.colouring);
            if (v.has_mate) {
                record_found(d.square, v, d.side, d.colouring);
                return true;
            }
        }
        return false;
    }

private:
    enum class RecordKind { Cell, Dark };
    struct Record {
        int level;
        int watch;
        int var;
        RecordKind kind;
    };
    struct DarkWatch {
        int base = 0;  // 0 when absent
        std::vector<std::int8_t> state;
        int assigned = 0;
    };
    struct ProcessedState {
        bool valid = false;
        std::uint64_t epoch = 0;
        bool has_mate = false;
        std::optional<LatinSquare> square_key_square;
    };

    bool done() const { return found_ && !cfg_.enumerate_all; }

    bool gate_open() const {
        if (stats_.ep_calls == 0)
            return true;
        return engine_.native_conflicts - native_at_last_ep_ >= cfg_.ep_conflict_throttle;
    }

    bool watch_ready(std::size_t w) const {
        if (!watches_[w].complete())
            return false;
        const DarkWatch &dw = dark_[w];
        return dw.base == 0 || dw.assigned == 60;
    }

    std::optional<MyrvoldColouring> read_colouring(std::size_t w) {
        if (!cfg_.profile)
            return std::nullopt;
        const DarkWatch &dw = dark_[w];
        if (dw.base == 0 || dw.assigned != 60)
            return std::nullopt;
        auto square = watches_[w].extract();
        if (!square.ok())
            return std::nullopt;
        std::vector<Cell> darks;
        for (int i = 0; i < 10; ++i)
            for (int c = 0; c < 6; ++c)
                if (dw.state[static_cast<std::size_t>(i * 6 + c)] == 1)
                    darks.push_back(Cell{i, c});
        auto colouring = colour(square.value(), darks);
        if (!colouring.ok()) {
            ++stats_.colouring_skips;
            return std::nullopt;
        }
        return colouring.value();
    }

    EpVerdict run_ep_counted(const LatinSquare &square,
                             const std::optional<MyrvoldColouring> &colouring, bool at_model) {
        (void)at_model;
        const std::uint64_t native = engine_.native_conflicts;
        if (stats_.ep_calls > 0) {
            const std::uint64_t sep = native - native_at_last_ep_;
            stats_.min_native_separation = std::min(stats_.min_native_separation, sep);
            if (sep < cfg_.ep_conflict_throttle)
                ++stats_.throttle_violations;
        }
        native_at_last_ep_ = native;
        ++stats_.ep_calls;
        return run_ep(square, colouring);
    }

    EpVerdict run_ep(const LatinSquare &square, const std::optional<MyrvoldColouring> &colouring) {
        Expected<ep::EpOutcome, ep::EpError> outcome =
            cfg_.profile && colouring
                ? ep::find_mates_myrvold(square, *colouring, *cfg_.profile, cfg_.ep_budget)
                : ep::find_mate(square, cfg_.ep_budget);
        if (!outcome)
            throw std::runtime_error("Euler-Parker budget exhausted during a hybrid run");
        stats_.ep_stage1_seconds += outcome.value().stats.stage1_seconds;
        stats_.ep_stage2_seconds += outcome.value().stats.stage2_seconds;
        EpVerdict v;
        v.has_mate = outcome.value().status == ep::EpStatus::Mate;
        if (v.has_mate) {
            v.mate = outcome.value().mate;
            v.transversals = outcome.value().chosen;
        }
        return v;
    }

    void record_found(const LatinSquare &square, const EpVerdict &v, enc::SquareId side,
                      const std::optional<MyrvoldColouring> &colouring) {
        ++stats_.mates_found;
        if (!found_) {
            found_ = true;
            found_square_ = square;
            found_mate_ = v.mate;
            found_transversals_ = v.transversals;
            found_colouring_ = colouring;
            triggered_ = side;
        }
        if (cfg_.enumerate_all && enumerated_.size() < 4096)
            enumerated_.emplace_back(square, *v.mate);
        if (!cfg_.enumerate_all)
            stop_.store(true, std::memory_order_relaxed);
    }

    // Builds, records, and returns the blocking clause for the square.
    std::vector<sat::Lit> emit_block(const LatinSquare &square, std::size_t w) {
        const enc::SquareId id = watches_[w].id();
        std::vector<sat::Lit> clause = blocking_clause(square, map_, id);
        ++stats_.blocks_emitted;
        ++stats_.blocked_squares;
        const std::size_t expect =
            static_cast<std::size_t>(square.order() - 1) * (square.order() - 1);
        if (clause.size() != expect)
            ++stats_.blocks_wrong_size;
        bool falsified = true;
        for (int i = 0; i + 1 < square.order(); ++i)
            for (int j = 0; j + 1 < square.order(); ++j)
                if (watches_[w].symbol_at(i, j) != square.at(i, j))
                    falsified = false;
        if (!falsified)
            ++stats_.blocks_not_falsified;
        const std::string key = square.reduced_key();
        if (memo_.seen_before(key))
            ++stats_.memo_reblocks;
        memo_.insert(key);
        if (cfg_.max_blocks && stats_.blocked_squares >= *cfg_.max_blocks)
            stop_.store(true, std::memory_order_relaxed);
        return clause;
    }

    std::vector<sat::Lit> take_stashed_block() {
        if (stash_.empty())
            return {};
        std::vector<sat::Lit> out = std::move(stash_.front());
        stash_.pop_front();
        return out;
    }

    // Runs EP on the completed watch; true when a mate was found.  A mateless
    // square stashes its blocking clause.
    bool check_square(std::size_t w, bool at_model) {
        auto square_or = watches_[w].extract();
        if (!square_or.ok())
            throw std::logic_error(square_or.error());
        const LatinSquare square = square_or.value();
        const std::optional<MyrvoldColouring> colouring = read_colouring(w);
        if (cfg_.profile && !colouring)
            return false;  // colouring not readable; skip this event
        const EpVerdict v = run_ep_counted(square, colouring, at_model);
        processed_[w] = ProcessedState{true, watches_[w].epoch(), v.has_mate, square};
        if (v.has_mate) {
            record_found(square, v, watches_[w].id(), colouring);
            if (cfg_.enumerate_all)
                stash_.push_back(emit_block(square, w));
            return true;
        }
        stash_.push_back(emit_block(square, w));
        return false;
    }

    void drain_deferred_if_open() {
        while (!deferred_.empty() && gate_open() && !done()) {
            const Deferred d = std::move(deferred_.front());
            deferred_.pop_front();
            const EpVerdict v = run_ep_counted(d.square, d.colouring, false);
            if (v.has_mate)
                record_found(d.square, v, d.side, d.colouring);
            // mateless: its blocking clause was already installed at rejection
        }
    }

    const enc::VariableMap &map_;
    const HybridConfig &cfg_;
    const sat::Stats &engine_;
    std::atomic<bool> &stop_;
    const std::atomic<bool> *caller_stop_;

    std::vector<SquareWatch> watches_;
    std::vector<DarkWatch> dark_;
    std::vector<ProcessedState> processed_;
    std::vector<Record> records_;
    std::deque<std::vector<sat::Lit>> stash_;
    std::deque<Deferred> deferred_;
    BlockedMemo memo_;

    bool found_ = false;
    std::optional<LatinSquare> found_square_;
    std::optional<LatinSquare> found_mate_;
    std::optional<MyrvoldColouring> found_colouring_;
    std::vector<Transversal> found_transversals_;
    enc::SquareId triggered_ = enc::SquareId::P;
    std::vector<std::pair<LatinSquare, LatinSquare>> enumerated_;

    std::uint64_t native_at_last_ep_ = 0;
    HybridStats stats_;
};

} // namespace

HybridResult run_hybrid(const enc::Cnf &cnf, const enc::VariableMap &map, const HybridConfig &cfg,
                        const sat::Limits &limits) {
    sat::Solver solver;
    solver.ensure_vars(cnf.num_vars);
    for (const enc::Clause &c : cnf.clauses)
        solver.add_clause(std::span<const sat::Lit>(c.data(), c.size()));
    solver.set_option("shuffle_seed", cfg.shuffle_seed);

    std::atomic<bool> stop{false};
    EpPropagator prop(map, cfg, solver.stats(), stop, limits.stop);
    solver.attach_propagator(&prop);
    for (const enc::SquareId id : cfg.watched) {
        const int base = map.square_var_begin(id);
        const int block = map.order() * map.order() * map.order();
        for (int v = base; v < base + block; ++v)
            solver.observe_variable(v);
        if (cfg.profile && map.has_dark_block(id))
            for (int i = 0; i < map.order(); ++i)
                for (int c = 0; c < 6; ++c)
                    solver.observe_variable(map.dark_var(id, i, c));
    }

    sat::Limits engine_limits = limits;
    engine_limits.stop = &stop;

    const auto t0 = std::chrono::steady_clock::now();
    const sat::SolveResult res = solver.solve({}, engine_limits);
    HybridResult out;
    out.engine = res.stats;

    bool found_by_drain = false;
    if (!prop.found() && res.status == sat::Status::Unsat) {
        // verify any squares rejected while the throttle was closed
        found_by_drain = prop.drain_all_deferred();
    }

    out.stats = prop.stats();
    out.stats.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.stats.sat_seconds = std::max(
        0.0, out.stats.total_seconds - out.stats.ep_stage1_seconds - out.stats.ep_stage2_seconds);
    out.enumerated = std::move(prop.enumerated());

    if (prop.found()) {
        out.status = HybridStatus::Found;
        out.square = prop.found_square();
        out.mate = prop.found_mate();
        out.colouring = prop.found_colouring();
        out.transversals = prop.found_transversals();
        out.triggered = prop.triggered();
        out.found_by_drain = found_by_drain;
    } else if (res.status == sat::Status::Unsat) {
        out.status = HybridStatus::Unsat;
    } else {
        out.status = HybridStatus::Timeout;
    }
    return out;
}

std::string stats_record(const HybridResult &r, std::int64_t seed, const std::string &mode,
                         const std::string &pair_type) {
    std::ostringstream out;
    const char *status = r.status == HybridStatus::Found
                             ? "sat"
                             : (r.status == HybridStatus::Unsat ? "unsat" : "timeout");
    out << "seed=" << seed << " mode=" << mode << " pair_type=" << pair_type
        << " status=" << status << " total_s=" << r.stats.total_seconds
        << " sat_s=" << r.stats.sat_seconds << " ep1_s=" << r.stats.ep_stage1_seconds
        << " ep2_s=" << r.stats.ep_stage2_seconds << " ep_calls=" << r.stats.ep_calls
        << " blocked_squares=" << r.stats.blocked_squares;
    return out.str();
}

} // namespace mols::hybrid
