#include <doctest.h>

#include <random>
#include <sstream>

#include "mols/encoder.hpp"
#include "mols/satengine.hpp"
#include "oracles.hpp"

using namespace mols;
using namespace mols::sat;

namespace {

Solver make_solver(int num_vars, const std::vector<std::vector<int>> &clauses) {
    Solver s;
    s.ensure_vars(num_vars);
    for (const auto &c : clauses) {
        std::vector<Lit> lits(c.begin(), c.end());
        s.add_clause(std::span<const Lit>(lits.data(), lits.size()));
    }
    return s;
}

// Rejects every full model with its negation: the solver must enumerate all
// models and conclude unsat.
class BlockEverything final : public ExternalPropagator {
public:
    int rejections = 0;
    ModelVerdict on_solution_check(std::span<const Lit> model) override {
        ++rejections;
        std::vector<Lit> clause;
        for (const Lit l : model)
            clause.push_back(-l);
        return {false, std::move(clause)};
    }
};

// Observes assignments but never interferes; used for the no-op differential
// test and for watch-invariant probing at stable points.
class PassiveProbe final : public ExternalPropagator {
public:
    explicit PassiveProbe(Solver &s) : solver_(s) {}
    int assigns = 0;
    int backtracks = 0;
    bool invariant_held = true;
    void on_assign(Lit, int) override { ++assigns; }
    void on_backtrack(int) override { ++backtracks; }
    bool has_external_clause() override {
        invariant_held = invariant_held && solver_.validate_watches();
        return false;
    }

private:
    Solver &solver_;
};

} // namespace

TEST_CASE("unit contradiction is unsat") {
    Solver s = make_solver(1, {{1}, {-1}});
    CHECK(s.solve().status == Status::Unsat);
}

TEST_CASE("empty instance with free variables is sat") {
    Solver s;
    s.ensure_vars(3);
    const auto res = s.solve();
    REQUIRE(res.status == Status::Sat);
    CHECK(res.model.size() == 3);
}

TEST_CASE("pigeonhole php(4,3) is unsat") {
    int vars = 0;
    const auto clauses = test::php_cnf(4, 3, vars);
    CHECK_FALSE(test::dpll_satisfiable(vars, clauses));  // oracle agrees
    Solver s = make_solver(vars, clauses);
    CHECK(s.solve().status == Status::Unsat);
}

TEST_CASE("latin instance at n=4 solves and decodes") {
    enc::EncodeConfig cfg;
    cfg.order = 4;
    const auto inst = enc::encode_latin(cfg);
    Solver s;
    s.ensure_vars(inst.cnf.num_vars);
    for (const auto &c : inst.cnf.clauses)
        s.add_clause(std::span<const Lit>(c.data(), c.size()));
    const auto res = s.solve();
    REQUIRE(res.status == Status::Sat);
    CHECK(enc::decode_square(res.model, inst.map, enc::SquareId::P).ok());
}

TEST_CASE("verdicts agree with the DPLL oracle on random instances") {
    std::mt19937_64 rng(20260808);
    std::uniform_int_distribution<int> vars_dist(3, 20);
    int sat_count = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int vars = vars_dist(rng);
        const int clauses = static_cast<int>(vars * 4.0) + static_cast<int>(rng() % 8);
        const auto cnf = test::random_cnf(rng, vars, clauses, 3);
        Solver s = make_solver(vars, cnf);
        const auto res = s.solve();
        const bool oracle = test::dpll_satisfiable(vars, cnf);
        REQUIRE(res.status != Status::Timeout);
        CHECK((res.status == Status::Sat) == oracle);
        if (res.status == Status::Sat) {
            ++sat_count;
            for (const auto &clause : cnf) {
                bool satisfied = false;
                for (const int l : clause)
                    satisfied = satisfied ||
                                res.model[static_cast<std::size_t>(std::abs(l) - 1)] == l;
                CHECK(satisfied);
            }
        }
        CHECK(s.validate_watches());
    }
    CHECK(sat_count > 100);  // the mix actually exercises both outcomes
}

TEST_CASE("propagator that rejects every model forces enumeration to unsat") {
    Solver s;
    s.ensure_vars(2);
    BlockEverything prop;
    s.attach_propagator(&prop);
    const auto res = s.solve();
    CHECK(res.status == Status::Unsat);
    CHECK(prop.rejections == 4);
    CHECK(res.stats.external_clauses_added == 4);
}

TEST_CASE("a passive propagator changes no verdicts") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const int vars = 5 + static_cast<int>(rng() % 12);
        const auto cnf = test::random_cnf(rng, vars, vars * 4, 3);
        Solver plain = make_solver(vars, cnf);
        const auto bare = plain.solve();

        Solver observed = make_solver(vars, cnf);
        PassiveProbe probe(observed);
        observed.attach_propagator(&probe);
        for (Var v = 1; v <= vars; ++v)
            observed.observe_variable(v);
        const auto probed = observed.solve();
        CHECK(bare.status == probed.status);
        CHECK(probe.invariant_held);
        if (probed.status == Status::Sat)
            CHECK(probe.assigns > 0);
    }
}

TEST_CASE("observed assignment stream is consistent under backtracking") {
    // every on_assign/on_backtrack pair must keep a replayed trail view exact
    class TrailMirror final : public ExternalPropagator {
    public:
        std::vector<std::pair<Lit, int>> view;
        bool consistent = true;
        void on_assign(Lit l, int level) override {
            if (!view.empty() && view.back().second > level)
                consistent = false;
            view.emplace_back(l, level);
        }
        void on_backtrack(int new_level) override {
            while (!view.empty() && view.back().second > new_level)
                view.pop_back();
        }
    };
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int vars = 8 + static_cast<int>(rng() % 8);
        const auto cnf = test::random_cnf(rng, vars, vars * 4, 3);
        Solver s = make_solver(vars, cnf);
        TrailMirror mirror;
        s.attach_propagator(&mirror);
        for (Var v = 1; v <= vars; ++v)
            s.observe_variable(v);
        const auto res = s.solve();
        CHECK(mirror.consistent);
        if (res.status == Status::Sat) {
            // replayed view matches the model on every observed variable
            for (const auto &[lit, level] : mirror.view)
                CHECK(res.model[static_cast<std::size_t>(var_of(lit) - 1)] == lit);
        }
    }
}

TEST_CASE("shuffle seeds change the first decisions") {
    enc::EncodeConfig cfg;
    cfg.order = 6;
    const auto inst = enc::encode_latin(cfg);
    auto run = [&](std::int64_t seed) {
        Solver s;
        s.ensure_vars(inst.cnf.num_vars);
        for (const auto &c : inst.cnf.clauses)
            s.add_clause(std::span<const Lit>(c.data(), c.size()));
        s.set_option("shuffle_seed", seed);
        s.set_option("log_decisions", 1);
        const auto res = s.solve();
        REQUIRE(res.status == Status::Sat);
        return std::vector<Lit>(s.decision_log().begin(), s.decision_log().end());
    };
    const auto log0 = run(0);
    const auto log1 = run(1);
    const auto log1_again = run(1);
    CHECK(log0 != log1);
    CHECK(log1 == log1_again);
}

TEST_CASE("same seed reproduces identical statistics") {
    std::mt19937_64 rng(123);
    const auto cnf = test::random_cnf(rng, 18, 76, 3);
    auto run = [&] {
        Solver s = make_solver(18, cnf);
        s.set_option("shuffle_seed", 5);
        return s.solve();
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.status == b.status);
    CHECK(a.stats.conflicts == b.stats.conflicts);
    CHECK(a.stats.decisions == b.stats.decisions);
    CHECK(a.stats.propagations == b.stats.propagations);
    CHECK(a.stats.restarts == b.stats.restarts);
}

TEST_CASE("reduction keeps the learned database bounded") {
    // a hard unsat instance with a tiny reduction interval must reduce
    int vars = 0;
    const auto clauses = test::php_cnf(7, 6, vars);
    Solver s = make_solver(vars, clauses);
    s.set_option("reduce_base", 50);
    s.set_option("reduce_inc", 10);
    const auto res = s.solve();
    CHECK(res.status == Status::Unsat);
    CHECK(res.stats.reductions >= 1);
    CHECK(res.stats.peak_learned <= res.stats.learned_clauses);
}

TEST_CASE("unknown options are rejected, known ones accepted") {
    Solver s;
    CHECK(s.set_option("shuffle_seed", 3).ok());
    CHECK(s.set_option("luby_base", 32).ok());
    CHECK(s.set_option("reduce_base", 100).ok());
    CHECK(s.set_option("external_forgettable", 0).ok());
    CHECK_FALSE(s.set_option("definitely_not_an_option", 1).ok());
}

TEST_CASE("retained external clauses survive reductions") {
    // same enumeration as the block-everything test, but with retention on
    // and a reduction interval of one conflict: the verdict must still be
    // reached after exactly 2^3 rejections
    Solver s;
    s.ensure_vars(3);
    s.set_option("external_forgettable", 0);
    s.set_option("reduce_base", 1);
    s.set_option("reduce_inc", 0);
    BlockEverything prop;
    s.attach_propagator(&prop);
    const auto res = s.solve();
    CHECK(res.status == Status::Unsat);
    CHECK(prop.rejections == 8);
    CHECK(res.stats.external_clauses_deleted == 0);
}

TEST_CASE("assumptions steer and can contradict") {
    Solver s = make_solver(3, {{1, 2}, {-3, 1}});
    std::vector<Lit> want_two{2, -1};
    auto res = s.solve(want_two);
    REQUIRE(res.status == Status::Sat);
    CHECK(res.model[1] == 2);
    CHECK(res.model[0] == -1);

    Solver forced = make_solver(1, {{1}});
    std::vector<Lit> contradiction{-1};
    CHECK(forced.solve(contradiction).status == Status::Unsat);
}

TEST_CASE("conflict budget reports Budget status") {
    int vars = 0;
    const auto clauses = test::php_cnf(8, 7, vars);
    Solver s = make_solver(vars, clauses);
    Limits limits;
    limits.max_conflicts = 10;
    const auto res = s.solve({}, limits);
    CHECK(res.status == Status::Budget);
}

TEST_CASE("stop flag interrupts the search") {
    int vars = 0;
    const auto clauses = test::php_cnf(9, 8, vars);
    Solver s = make_solver(vars, clauses);
    std::atomic<bool> stop{true};
    Limits limits;
    limits.stop = &stop;
    CHECK(s.solve({}, limits).status == Status::Timeout);
}

TEST_CASE("dimacs instances load and solve") {
    std::istringstream in("p cnf 3 3\n1 2 0\n-1 3 0\n-2 -3 0\n");
    const auto cnf = enc::read_dimacs(in);
    REQUIRE(cnf.ok());
    Solver s;
    s.ensure_vars(cnf.value().num_vars);
    for (const auto &c : cnf.value().clauses)
        s.add_clause(std::span<const Lit>(c.data(), c.size()));
    CHECK(s.solve().status == Status::Sat);
}

TEST_CASE("stats line lists the counters") {
    Stats st;
    st.conflicts = 3;
    st.decisions = 9;
    const auto line = stats_line(st);
    CHECK(line.find("conflicts=3") != std::string::npos);
    CHECK(line.find("decisions=9") != std::string::npos);
    CHECK(line.find("restarts=") != std::string::npos);
}
