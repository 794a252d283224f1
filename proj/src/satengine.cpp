#include "mols/satengine.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mols::sat {

std::string stats_line(const Stats &s) {
    std::ostringstream out;
    out << "conflicts=" << s.conflicts << " native_conflicts=" << s.native_conflicts
        << " decisions=" << s.decisions << " propagations=" << s.propagations
        << " restarts=" << s.restarts << " reductions=" << s.reductions
        << " external_added=" << s.external_clauses_added
        << " external_deleted=" << s.external_clauses_deleted
        << " peak_learned=" << s.peak_learned;
    return out.str();
}

namespace {

struct Clause {
    std::vector<Lit> lits;
    double activity = 0.0;
    std::uint64_t id = 0;
    std::size_t original_index = SIZE_MAX;  // slot in Impl::original for externals
    int lbd = 0;
    bool learnt = false;
    bool external = false;
    bool forgettable = false;
    bool dying = false;
};

struct Watcher {
    Clause *clause;
    Lit blocker;
};

// Finite Luby subsequences: 1 1 2 1 1 2 4 ...  (0-based index)
std::uint64_t luby(std::uint64_t x) {
    std::uint64_t size = 1, seq = 0;
    while (size < x + 1) {
        ++seq;
        size = 2 * size + 1;
    }
    while (size - 1 != x) {
        size = (size - 1) >> 1;
        --seq;
        x = x % size;
    }
    return 1ull << seq;
}

} // namespace

struct Solver::Impl {
    std::vector<std::unique_ptr<Clause>> problem_clauses;
    std::vector<std::unique_ptr<Clause>> learnt_clauses;  // learnt and external
    std::vector<std::vector<Lit>> original;               // for model verification
    std::uint64_t next_clause_id = 1;

    std::vector<std::int8_t> value;  // per var: 0 unassigned, 1 true, -1 false
    std::vector<int> level;
    std::vector<Clause *> reason;
    std::vector<Lit> trail;
    std::vector<int> trail_lim;
    std::size_t qhead = 0;
    bool ok = true;

    std::vector<std::vector<Watcher>> watches;  // indexed by literal

    std::vector<double> activity;
    std::vector<std::int8_t> polarity;  // saved phase, 1 = true
    std::vector<int> heap;
    std::vector<int> heap_pos;
    double var_inc = 1.0;
    double cla_inc = 1.0;

    std::int64_t shuffle_seed = 0;
    std::int64_t luby_base = 64;
    std::int64_t reduce_base = 2000;
    std::int64_t reduce_inc = 300;
    double var_decay = 0.95;
    bool phase_saving = true;
    bool ccmin = true;
    bool log_decisions = false;
    bool external_forgettable = true;  // retention policy for propagator clauses

    ExternalPropagator *propagator = nullptr;
    std::vector<std::uint8_t> observed;
    std::size_t notify_next = 0;

    Stats stats;
    std::vector<Lit> decisions_logged;

    std::vector<std::uint8_t> seen;
    std::vector<Var> to_clear;

    int nvars = 0;

    static std::size_t lit_index(Lit l) {
        return l > 0 ? 2 * static_cast<std::size_t>(l - 1)
                     : 2 * static_cast<std::size_t>(-l - 1) + 1;
    }
    std::int8_t value_of(Lit l) const {
        const std::int8_t v = value[static_cast<std::size_t>(var_of(l))];
        return l > 0 ? v : static_cast<std::int8_t>(-v);
    }
    int level_of(Lit l) const { return level[static_cast<std::size_t>(var_of(l))]; }
    int current_level() const { return static_cast<int>(trail_lim.size()); }

    void ensure_var(Var v) {
        while (nvars < v) {
            ++nvars;
            value.push_back(0);
            level.push_back(0);
            reason.push_back(nullptr);
            activity.push_back(0.0);
            polarity.push_back(0);
            observed.push_back(0);
            seen.push_back(0);
            heap_pos.push_back(-1);
            watches.emplace_back();
            watches.emplace_back();
            heap_insert(nvars);
        }
    }

    // ---- activity heap ----------------------------------------------------
    bool heap_less(int a, int b) const {  // a has lower priority than b
        const double aa = activity[static_cast<std::size_t>(a)];
        const double ab = activity[static_cast<std::size_t>(b)];
        if (aa != ab)
            return aa < ab;
        return a > b;  // lower index wins ties
    }
    void heap_place(std::size_t i) { heap_pos[static_cast<std::size_t>(heap[i])] = static_cast<int>(i); }
    void heap_swap(std::size_t i, std::size_t j) {
        std::swap(heap[i], heap[j]);
        heap_place(i);
        heap_place(j);
    }
    void heap_up(std::size_t i) {
        while (i > 0) {
            const std::size_t p = (i - 1) / 2;
            if (!heap_less(heap[p], heap[i]))
                break;
            heap_swap(p, i);
            i = p;
        }
    }
    void heap_down(std::size_t i) {
        for (;;) {
            std::size_t best = i;
            const std::size_t l = 2 * i + 1, r = 2 * i + 2;
            if (l < heap.size() && heap_less(heap[best], heap[l]))
                best = l;
            if (r < heap.size() && heap_less(heap[best], heap[r]))
                best = r;
            if (best == i)
                break;
            heap_swap(i, best);
            i = best;
        }
    }
    void heap_insert(Var v) {
        if (heap_pos[static_cast<std::size_t>(v)] != -1)
            return;
        heap.push_back(v);
        heap_place(heap.size() - 1);
        heap_up(heap.size() - 1);
    }
    void heap_rebuild() {
        for (std::size_t i = heap.size(); i > 0; --i)
            heap_down(i - 1);
        for (std::size_t i = 0; i < heap.size(); ++i)
            heap_place(i);
    }

    void bump_var(Var v) {
        activity[static_cast<std::size_t>(v)] += var_inc;
        if (activity[static_cast<std::size_t>(v)] > 1e100) {
            for (Var u = 1; u <= nvars; ++u)
                activity[static_cast<std::size_t>(u)] *= 1e-100;
            var_inc *= 1e-100;
        }
        const int pos = heap_pos[static_cast<std::size_t>(v)];
        if (pos >= 0)
            heap_up(static_cast<std::size_t>(pos));
    }
    void bump_clause(Clause *c) {
        c->activity += cla_inc;
        if (c->activity > 1e20) {
            for (auto &cl : learnt_clauses)
                cl->activity *= 1e-20;
            cla_inc *= 1e-20;
        }
    }

    // ---- trail --------------------------------------------------------------
    void enqueue(Lit l, Clause *from) {
        assert(value_of(l) == 0);
        const Var v = var_of(l);
        value[static_cast<std::size_t>(v)] = l > 0 ? 1 : -1;
        level[static_cast<std::size_t>(v)] = current_level();
        reason[static_cast<std::size_t>(v)] = from;
        trail.push_back(l);
    }

    void new_decision_level() { trail_lim.push_back(static_cast<int>(trail.size())); }

    void backtrack(int target) {
        if (current_level() <= target)
            return;
        const std::size_t keep = static_cast<std::size_t>(trail_lim[static_cast<std::size_t>(target)]);
        for (std::size_t t = trail.size(); t > keep; --t) {
            const Var v = var_of(trail[t - 1]);
            if (phase_saving)
                polarity[static_cast<std::size_t>(v)] =
                    value[static_cast<std::size_t>(v)] > 0 ? 1 : 0;
            value[static_cast<std::size_t>(v)] = 0;
            reason[static_cast<std::size_t>(v)] = nullptr;
            heap_insert(v);
        }
        trail.resize(keep);
        trail_lim.resize(static_cast<std::size_t>(target));
        qhead = std::min(qhead, trail.size());
        notify_next = std::min(notify_next, trail.size());
        if (propagator)
            propagator->on_backtrack(target);
    }

    // ---- watches --------------------------------------------------------------
    void attach(Clause *c) {
        assert(c->lits.size() >= 2);
        watches[lit_index(c->lits[0])].push_back({c, c->lits[1]});
        watches[lit_index(c->lits[1])].push_back({c, c->lits[0]});
    }

    void detach(Clause *c) {
        for (int w = 0; w < 2; ++w) {
            auto &list = watches[lit_index(c->lits[static_cast<std::size_t>(w)])];
            for (std::size_t i = 0; i < list.size(); ++i)
                if (list[i].clause == c) {
                    list[i] = list.back();
                    list.pop_back();
                    break;
                }
        }
    }

    bool locked(const Clause *c) const {
        return value_of(c->lits[0]) > 0 &&
               reason[static_cast<std::size_t>(var_of(c->lits[0]))] == c;
    }

    // Moves the two best watch candidates to the front: unassigned before
    // true before false, higher level first within a class.  A false watch
    // then never outlives its partner under backtracking.
    void place_watches(Clause *c) {
        auto score = [&](Lit l) -> long {
            const std::int8_t v = value_of(l);
            if (v == 0)
                return 3L << 30;
            if (v > 0)
                return (1L << 30) + level_of(l);
            return level_of(l);
        };
        auto &lits = c->lits;
        for (std::size_t w = 0; w < 2; ++w) {
            std::size_t best = w;
            for (std::size_t i = w + 1; i < lits.size(); ++i)
                if (score(lits[i]) > score(lits[best]))
                    best = i;
            std::swap(lits[w], lits[best]);
        }
    }

    // ---- propagation -----------------------------------------------------------
    Clause *propagate() {
        Clause *conflict = nullptr;
        while (qhead < trail.size() && conflict == nullptr) {
            const Lit p = trail[qhead++];
            ++stats.propagations;
            auto &list = watches[lit_index(-p)];
            std::size_t keep = 0;
            std::size_t i = 0;
            for (; i < list.size(); ++i) {
                const Watcher w = list[i];
                if (value_of(w.blocker) > 0) {
                    list[keep++] = w;
                    continue;
                }
                Clause *c = w.clause;
                auto &lits = c->lits;
                if (lits[0] == -p)
                    std::swap(lits[0], lits[1]);
                assert(lits[1] == -p);
                if (value_of(lits[0]) > 0) {
                    list[keep++] = {c, lits[0]};
                    continue;
                }
                bool moved = false;
                for (std::size_t k = 2; k < lits.size(); ++k)
                    if (value_of(lits[k]) >= 0) {
                        std::swap(lits[1], lits[k]);
                        watches[lit_index(lits[1])].push_back({c, lits[0]});
                        moved = true;
                        break;
                    }
                if (moved)
                    continue;
                list[keep++] = {c, lits[0]};
                if (value_of(lits[0]) < 0) {
                    conflict = c;
                    ++i;
                    break;
                }
                enqueue(lits[0], c);
            }
            for (; i < list.size(); ++i)
                list[keep++] = list[i];
            list.resize(keep);
        }
        return conflict;
    }

    // ---- conflict analysis -------------------------------------------------------
    void analyze(Clause *confl, std::vector<Lit> &learnt, int &bt_level, int &lbd) {
        learnt.clear();
        learnt.push_back(0);  // placeholder for the asserting literal
        int path = 0;
        Lit p = 0;
        std::size_t index = trail.size();
        to_clear.clear();

        do {
            assert(confl != nullptr);
            if (confl->learnt)
                bump_clause(confl);
            for (const Lit q : confl->lits) {
                if (q == p)
                    continue;
                const Var v = var_of(q);
                if (!seen[static_cast<std::size_t>(v)] && level[static_cast<std::size_t>(v)] > 0) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    to_clear.push_back(v);
                    bump_var(v);
                    if (level[static_cast<std::size_t>(v)] >= current_level())
                        ++path;
                    else
                        learnt.push_back(q);
                }
            }
            while (!seen[static_cast<std::size_t>(var_of(trail[index - 1]))])
                --index;
            --index;
            p = trail[index];
            confl = reason[static_cast<std::size_t>(var_of(p))];
            seen[static_cast<std::size_t>(var_of(p))] = 0;
            --path;
        } while (path > 0);
        learnt[0] = -p;

        if (ccmin) {
            std::size_t out = 1;
            for (std::size_t i = 1; i < learnt.size(); ++i) {
                const Clause *r = reason[static_cast<std::size_t>(var_of(learnt[i]))];
                bool redundant = r != nullptr;
                if (r)
                    for (const Lit x : r->lits) {
                        const Var xv = var_of(x);
                        if (xv == var_of(learnt[i]))
                            continue;
                        if (level[static_cast<std::size_t>(xv)] > 0 &&
                            !seen[static_cast<std::size_t>(xv)]) {
                            redundant = false;
                            break;
                        }
                    }
                if (!redundant)
                    learnt[out++] = learnt[i];
            }
            learnt.resize(out);
        }

        for (const Var v : to_clear)
            seen[static_cast<std::size_t>(v)] = 0;
        to_clear.clear();

        if (learnt.size() == 1) {
            bt_level = 0;
        } else {
            std::size_t max_i = 1;
            for (std::size_t i = 2; i < learnt.size(); ++i)
                if (level_of(learnt[i]) > level_of(learnt[max_i]))
                    max_i = i;
            std::swap(learnt[1], learnt[max_i]);
            bt_level = level_of(learnt[1]);
        }

        lbd = 0;
        std::vector<int> levels;
        for (const Lit q : learnt) {
            const int l = level_of(q);
            if (std::find(levels.begin(), levels.end(), l) == levels.end()) {
                levels.push_back(l);
                ++lbd;
            }
        }
    }

    Clause *record_learnt(std::vector<Lit> learnt, int lbd) {
        auto owned = std::make_unique<Clause>();
        Clause *c = owned.get();
        c->lits = std::move(learnt);
        c->lbd = lbd;
        c->learnt = true;
        c->id = next_clause_id++;
        c->activity = cla_inc;
        learnt_clauses.push_back(std::move(owned));
        ++stats.learned_clauses;
        stats.peak_learned = std::max<std::uint64_t>(stats.peak_learned, learnt_clauses.size());
        attach(c);
        return c;
    }

    // Shared conflict path: analyze, backjump, assert.  False when the
    // conflict refutes the root level.
    bool handle_conflict(Clause *confl) {
        ++stats.conflicts;
        if (!confl->external)
            ++stats.native_conflicts;
        if (current_level() == 0) {
            ok = false;
            return false;
        }
        std::vector<Lit> learnt;
        int bt = 0, lbd = 0;
        analyze(confl, learnt, bt, lbd);
        backtrack(bt);
        if (learnt.size() == 1) {
            if (value_of(learnt[0]) < 0) {
                ok = false;
                return false;
            }
            if (value_of(learnt[0]) == 0)
                enqueue(learnt[0], nullptr);
        } else {
            Clause *c = record_learnt(std::move(learnt), lbd);
            enqueue(c->lits[0], c);
        }
        var_inc /= var_decay;
        cla_inc /= 0.999;
        return true;
    }

    // ---- clause database reduction ------------------------------------------------
    void reduce_db() {
        ++stats.reductions;
        std::vector<Clause *> removable;
        for (auto &c : learnt_clauses) {
            if (locked(c.get()) || c->lbd <= 2 || c->lits.size() <= 2)
                continue;
            if (c->external && !c->forgettable)
                continue;
            removable.push_back(c.get());
        }
        std::sort(removable.begin(), removable.end(), [](const Clause *a, const Clause *b) {
            if (a->lbd != b->lbd)
                return a->lbd > b->lbd;
            if (a->activity != b->activity)
                return a->activity < b->activity;
            return a->id < b->id;
        });
        removable.resize(removable.size() / 2);
        for (Clause *c : removable) {
            c->dying = true;
            detach(c);
            if (c->external) {
                ++stats.external_clauses_deleted;
                // a dropped forgettable clause no longer binds future models
                if (c->original_index != SIZE_MAX)
                    original[c->original_index].clear();
            }
        }
        std::erase_if(learnt_clauses,
                      [](const std::unique_ptr<Clause> &c) { return c->dying; });
    }

    // ---- external clauses ------------------------------------------------------------
    enum class InstallResult { Ok, RootConflict };

    // Attaches an externally produced clause under the current (possibly
    // deep) trail, backtracking and analyzing as needed until the watch
    // discipline holds again.
    InstallResult install_external(std::vector<Lit> lits, bool forgettable) {
        std::sort(lits.begin(), lits.end(), [](Lit a, Lit b) {
            return var_of(a) != var_of(b) ? var_of(a) < var_of(b) : a < b;
        });
        lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
        for (std::size_t i = 1; i < lits.size(); ++i)
            if (lits[i] == -lits[i - 1])
                return InstallResult::Ok;  // tautology
        for (const Lit l : lits) {
            assert(var_of(l) >= 1 && var_of(l) <= nvars && "propagator clause out of range");
            if (value_of(l) > 0 && level_of(l) == 0)
                return InstallResult::Ok;  // satisfied forever
        }
        std::erase_if(lits, [&](Lit l) { return value_of(l) < 0 && level_of(l) == 0; });
        ++stats.external_clauses_added;
        if (lits.empty()) {
            ok = false;
            return InstallResult::RootConflict;
        }
        const std::size_t original_index = original.size();
        original.push_back(lits);

        if (lits.size() == 1) {
            backtrack(0);
            if (value_of(lits[0]) < 0) {
                ok = false;
                return InstallResult::RootConflict;
            }
            if (value_of(lits[0]) == 0)
                enqueue(lits[0], nullptr);
            return InstallResult::Ok;
        }

        auto owned = std::make_unique<Clause>();
        Clause *c = owned.get();
        c->lits = std::move(lits);
        c->external = true;
        c->forgettable = forgettable;
        c->original_index = original_index;
        c->lbd = static_cast<int>(c->lits.size());
        c->id = next_clause_id++;
        c->activity = cla_inc;
        learnt_clauses.push_back(std::move(owned));
        stats.peak_learned = std::max<std::uint64_t>(stats.peak_learned, learnt_clauses.size());

        for (;;) {
            int non_false = 0;
            int max_false_level = 0;
            Lit u = 0;
            for (const Lit l : c->lits) {
                const std::int8_t v = value_of(l);
                if (v >= 0) {
                    ++non_false;
                    u = l;
                } else {
                    max_false_level = std::max(max_false_level, level_of(l));
                }
            }
            if (non_false >= 2) {
                place_watches(c);
                attach(c);
                return InstallResult::Ok;
            }
            if (non_false == 1) {
                if (value_of(u) > 0 && level_of(u) <= max_false_level) {
                    place_watches(c);  // satisfied at or below every false literal
                    attach(c);
                    return InstallResult::Ok;
                }
                backtrack(max_false_level);
                if (value_of(u) == 0) {
                    place_watches(c);
                    attach(c);
                    assert(c->lits[0] == u);
                    enqueue(u, c);
                    return InstallResult::Ok;
                }
                continue;  // u changed state; re-evaluate
            }
            if (max_false_level == 0) {
                ok = false;
                return InstallResult::RootConflict;
            }
            backtrack(max_false_level);
            if (!handle_conflict(c))
                return InstallResult::RootConflict;
            // handle_conflict backjumped further; some literals are open again
        }
    }

    // ---- propagator plumbing --------------------------------------------------------
    void notify_assignments() {
        if (!propagator)
            return;
        while (notify_next < trail.size()) {
            const Lit l = trail[notify_next];
            const Var v = var_of(l);
            if (observed[static_cast<std::size_t>(v)])
                propagator->on_assign(l, level[static_cast<std::size_t>(v)]);
            ++notify_next;
        }
    }

    bool verify_model() const {
        for (const auto &cl : original) {
            if (cl.empty())
                continue;  // deleted forgettable external
            bool sat = false;
            for (const Lit l : cl)
                if (value_of(l) > 0) {
                    sat = true;
                    break;
                }
            if (!sat)
                return false;
        }
        return true;
    }

    std::vector<Lit> snapshot_model() const {
        std::vector<Lit> model(static_cast<std::size_t>(nvars));
        for (Var v = 1; v <= nvars; ++v)
            model[static_cast<std::size_t>(v - 1)] = value[static_cast<std::size_t>(v)] > 0 ? v : -v;
        return model;
    }
};

Solver::Solver() : impl_(std::make_unique<Impl>()) {
    Impl &s = *impl_;
    s.value.push_back(0);  // var 0 is unused
    s.level.push_back(0);
    s.reason.push_back(nullptr);
    s.activity.push_back(0.0);
    s.polarity.push_back(0);
    s.observed.push_back(0);
    s.seen.push_back(0);
    s.heap_pos.push_back(-1);
}

Solver::~Solver() = default;
Solver::Solver(Solver &&) noexcept = default;
Solver &Solver::operator=(Solver &&) noexcept = default;

Var Solver::new_var() {
    impl_->ensure_var(impl_->nvars + 1);
    return impl_->nvars;
}

void Solver::ensure_vars(int count) { impl_->ensure_var(count); }

int Solver::num_vars() const { return impl_->nvars; }

bool Solver::add_clause(std::span<const Lit> lits_in) {
    Impl &s = *impl_;
    if (!s.ok)
        return false;
    assert(s.current_level() == 0);
    std::vector<Lit> lits(lits_in.begin(), lits_in.end());
    for (const Lit l : lits) {
        assert(l != 0);
        s.ensure_var(var_of(l));
    }
    std::sort(lits.begin(), lits.end(), [](Lit a, Lit b) {
        return var_of(a) != var_of(b) ? var_of(a) < var_of(b) : a < b;
    });
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (std::size_t i = 1; i < lits.size(); ++i)
        if (lits[i] == -lits[i - 1])
            return true;  // tautology
    for (const Lit l : lits)
        if (s.value_of(l) > 0)
            return true;  // satisfied by a root assignment
    std::erase_if(lits, [&](Lit l) { return s.value_of(l) < 0; });
    s.original.push_back(lits);
    if (lits.empty()) {
        s.ok = false;
        return false;
    }
    if (lits.size() == 1) {
        s.enqueue(lits[0], nullptr);
        if (s.propagate() != nullptr)
            s.ok = false;
        return s.ok;
    }
    auto owned = std::make_unique<Clause>();
    Clause *c = owned.get();
    c->lits = std::move(lits);
    c->id = s.next_clause_id++;
    s.problem_clauses.push_back(std::move(owned));
    s.attach(c);
    return true;
}

bool Solver::add_clause(std::initializer_list<Lit> lits) {
    return add_clause(std::span<const Lit>(lits.begin(), lits.size()));
}

Expected<bool, std::string> Solver::set_option(const std::string &name, std::int64_t v) {
    Impl &s = *impl_;
    if (name == "shuffle_seed")
        s.shuffle_seed = v;
    else if (name == "luby_base")
        s.luby_base = std::max<std::int64_t>(1, v);
    else if (name == "reduce_base")
        s.reduce_base = std::max<std::int64_t>(1, v);
    else if (name == "reduce_inc")
        s.reduce_inc = std::max<std::int64_t>(0, v);
    else if (name == "var_decay_percent")
        s.var_decay = static_cast<double>(std::clamp<std::int64_t>(v, 1, 100)) / 100.0;
    else if (name == "phase_saving")
        s.phase_saving = v != 0;
    else if (name == "ccmin")
        s.ccmin = v != 0;
    else if (name == "log_decisions")
        s.log_decisions = v != 0;
    else if (name == "external_forgettable")
        s.external_forgettable = v != 0;
    else
        return std::string("unknown option: " + name);
    return true;
}

void Solver::attach_propagator(ExternalPropagator *p) { impl_->propagator = p; }

void Solver::observe_variable(Var v) {
    impl_->ensure_var(v);
    impl_->observed[static_cast<std::size_t>(v)] = 1;
}

const Stats &Solver::stats() const { return impl_->stats; }

std::span<const Lit> Solver::decision_log() const { return impl_->decisions_logged; }

SolveResult Solver::solve(std::span<const Lit> assumptions, const Limits &limits) {
    Impl &s = *impl_;
    SolveResult result;
    result.status = Status::Unsat;

    s.backtrack(0);
    s.decisions_logged.clear();
    if (!s.ok) {
        result.stats = s.stats;
        return result;
    }

    // seeded initial score shuffle; seed 0 keeps plain index order
    if (s.shuffle_seed != 0) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(s.shuffle_seed));
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        for (Var v = 1; v <= s.nvars; ++v)
            s.activity[static_cast<std::size_t>(v)] = dist(rng);
        s.heap_rebuild();
    }

    const auto t_start = std::chrono::steady_clock::now();
    const std::uint64_t conflicts_at_entry = s.stats.conflicts;
    std::uint64_t restart_count = 0;
    std::uint64_t restart_budget = static_cast<std::uint64_t>(s.luby_base) * luby(0);
    std::uint64_t conflicts_since_restart = 0;
    std::uint64_t next_reduce = s.stats.native_conflicts + static_cast<std::uint64_t>(s.reduce_base);
    std::uint64_t check_counter = 0;

    auto out_of_budget = [&]() -> std::optional<Status> {
        if (limits.stop && limits.stop->load(std::memory_order_relaxed))
            return Status::Timeout;
        if (limits.max_conflicts &&
            s.stats.conflicts - conflicts_at_entry >= *limits.max_conflicts)
            return Status::Budget;
        if (limits.wall_seconds && (++check_counter & 63) == 0) {
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
            if (elapsed >= *limits.wall_seconds)
                return Status::Timeout;
        }
        return std::nullopt;
    };

    for (;;) {
        Clause *confl = s.propagate();
        if (confl != nullptr) {
            if (!s.handle_conflict(confl)) {
                result.stats = s.stats;
                return result;
            }
            ++conflicts_since_restart;
            if (s.stats.native_conflicts >= next_reduce) {
                s.reduce_db();
                next_reduce = s.stats.native_conflicts +
                              static_cast<std::uint64_t>(s.reduce_base) +
                              static_cast<std::uint64_t>(s.reduce_inc) * s.stats.reductions;
            }
            if (auto st = out_of_budget()) {
                result.status = *st;
                result.stats = s.stats;
                return result;
            }
            continue;
        }

        s.notify_assignments();

        if (s.propagator) {
            bool installed = false;
            while (s.propagator->has_external_clause()) {
                installed = true;
                if (s.install_external(s.propagator->fetch_external_clause(),
                                       s.external_forgettable) ==
                    Impl::InstallResult::RootConflict) {
                    result.stats = s.stats;
                    return result;
                }
            }
            if (installed)
                continue;  // re-propagate, then poll again
        }

        if (static_cast<int>(s.trail.size()) == s.nvars) {
            for (const Lit a : assumptions)
                if (s.value_of(a) < 0) {
                    result.stats = s.stats;  // assumption conflicts with the instance
                    return result;
                }
            if (s.propagator) {
                auto verdict = s.propagator->on_solution_check(s.snapshot_model());
                if (!verdict.accept) {
                    if (s.install_external(std::move(verdict.reject_clause),
                                           s.external_forgettable) ==
                        Impl::InstallResult::RootConflict) {
                        result.stats = s.stats;
                        return result;
                    }
                    continue;
                }
            }
            if (!s.verify_model())
                throw std::logic_error("satengine: model failed verification");
            result.status = Status::Sat;
            result.model = s.snapshot_model();
            result.stats = s.stats;
            return result;
        }

        if (auto st = out_of_budget()) {
            result.status = *st;
            result.stats = s.stats;
            return result;
        }

        if (conflicts_since_restart >= restart_budget) {
            conflicts_since_restart = 0;
            ++restart_count;
            ++s.stats.restarts;
            restart_budget = static_cast<std::uint64_t>(s.luby_base) * luby(restart_count);
            if (s.current_level() > static_cast<int>(assumptions.size()))
                s.backtrack(static_cast<int>(assumptions.size()));
            continue;
        }

        if (s.current_level() < static_cast<int>(assumptions.size())) {
            const Lit a = assumptions[static_cast<std::size_t>(s.current_level())];
            if (s.value_of(a) > 0) {
                s.new_decision_level();  // already satisfied: empty level
                continue;
            }
            if (s.value_of(a) < 0) {
                result.stats = s.stats;  // assumption conflicts with the instance
                return result;
            }
            s.new_decision_level();
            s.enqueue(a, nullptr);
            ++s.stats.decisions;
            continue;
        }

        Var pick = 0;
        while (!s.heap.empty()) {
            const Var v = s.heap[0];
            s.heap_swap(0, s.heap.size() - 1);
            s.heap.pop_back();
            s.heap_pos[static_cast<std::size_t>(v)] = -1;
            if (!s.heap.empty())
                s.heap_down(0);
            if (s.value[static_cast<std::size_t>(v)] == 0) {
                pick = v;
                break;
            }
        }
        assert(pick != 0);  // the all-assigned case returned above
        ++s.stats.decisions;
        const Lit decision = s.polarity[static_cast<std::size_t>(pick)] ? pick : -pick;
        if (s.log_decisions && s.decisions_logged.size() < 256)
            s.decisions_logged.push_back(decision);
        s.new_decision_level();
        s.enqueue(decision, nullptr);
    }
}

bool Solver::validate_watches() const {
    const Impl &s = *impl_;
    auto check_clause = [&](const Clause *c) {
        if (c->lits.size() < 2)
            return true;
        const bool semantic = s.ok;  // a refuted instance holds a falsified clause
        for (int w = 0; w < 2; ++w) {
            const auto &list = s.watches[Impl::lit_index(c->lits[static_cast<std::size_t>(w)])];
            bool found = false;
            for (const auto &watcher : list)
                if (watcher.clause == c)
                    found = true;
            if (!found)
                return false;
        }
        // semantic invariant at a fixpoint: a clause is satisfied, has two
        // unfalsified watches, or would already have propagated/conflicted
        if (!semantic)
            return true;
        bool sat = false;
        int non_false = 0;
        for (const Lit l : c->lits) {
            if (s.value_of(l) > 0)
                sat = true;
            if (s.value_of(l) >= 0)
                ++non_false;
        }
        if (sat)
            return true;
        return non_false >= 2 && s.value_of(c->lits[0]) >= 0 && s.value_of(c->lits[1]) >= 0;
    };
    for (const auto &c : s.problem_clauses)
        if (!check_clause(c.get()))
            return false;
    for (const auto &c : s.learnt_clauses)
        if (!check_clause(c.get()))
            return false;
    return true;
}

} // namespace mols::sat
