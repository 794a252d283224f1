#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mols/expected.hpp"

namespace mols::sat {

using Var = int;           // 1-based
using Lit = std::int32_t;  // signed, DIMACS convention

inline Var var_of(Lit l) { return l < 0 ? -l : l; }

struct Stats {
    std::uint64_t conflicts = 0;
    std::uint64_t native_conflicts = 0;  // conflicts not caused by an external clause
    std::uint64_t decisions = 0;
    std::uint64_t propagations = 0;
    std::uint64_t restarts = 0;
    std::uint64_t reductions = 0;
    std::uint64_t external_clauses_added = 0;
    std::uint64_t external_clauses_deleted = 0;
    std::uint64_t learned_clauses = 0;
    std::uint64_t peak_learned = 0;
};

std::string stats_line(const Stats &stats);

enum class Status { Sat, Unsat, Timeout, Budget };

struct SolveResult {
    Status status = Status::Unsat;
    std::vector<Lit> model;  // model[v-1] = +v or -v when Sat
    Stats stats;
};

struct Limits {
    std::optional<std::uint64_t> max_conflicts;
    std::optional<double> wall_seconds;
    const std::atomic<bool> *stop = nullptr;
};

// Callback contract for user code observing the search.  Callbacks fire only
// at stable propagation points; a propagator must not call back into the
// solver and communicates only through returned clauses.
class ExternalPropagator {
public:
    virtual ~ExternalPropagator() = default;

    // Observed-variable assignment in trail order, with its decision level.
    virtual void on_assign(Lit lit, int level) { (void)lit; (void)level; }
    // Assignments above new_level are gone.
    virtual void on_backtrack(int new_level) { (void)new_level; }

    virtual bool has_external_clause() { return false; }
    virtual std::vector<Lit> fetch_external_clause() { return {}; }

    struct ModelVerdict {
        bool accept = true;
        std::vector<Lit> reject_clause;
    };
    virtual ModelVerdict on_solution_check(std::span<const Lit> model) {
        (void)model;
        return {};
    }
};

class Solver {
public:
    Solver();
    ~Solver();
    Solver(const Solver &) = delete;
    Solver &operator=(const Solver &) = delete;
    Solver(Solver &&) noexcept;
    Solver &operator=(Solver &&) noexcept;

    Var new_var();
    void ensure_vars(int count);
    int num_vars() const;

    // False when the clause makes the instance unsatisfiable at root.
    bool add_clause(std::span<const Lit> lits);
    bool add_clause(std::initializer_list<Lit> lits);

    // Options: shuffle_seed, luby_base, reduce_base, reduce_inc,
    // var_decay_percent, phase_saving, ccmin, log_decisions,
    // external_forgettable (retention policy for propagator clauses).
    Expected<bool, std::string> set_option(const std::string &name, std::int64_t value);

    void attach_propagator(ExternalPropagator *p);
    void observe_variable(Var v);

    SolveResult solve(std::span<const Lit> assumptions = {}, const Limits &limits = {});

    const Stats &stats() const;
    std::span<const Lit> decision_log() const;  // filled when log_decisions is set

    // Test hook: watched-literal and no-missed-propagation invariants.
    bool validate_watches() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace mols::sat
