#include "mols/eulerparker.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <map>
#include <set>

namespace mols::ep {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Transversal transversal_from_solution(const LatinSquare &square, const exactcover::Solution &sol) {
    const int n = square.order();
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (sol.x[static_cast<std::size_t>(i) * n + j])
                cells.push_back(Cell{i, j});
    return Transversal::unchecked(n, std::move(cells));
}

// Cell-coverage system over a subset of the transversal set: one equation per
// cell, one column per selected transversal, plus the extra equations.
exactcover::DiophantineSystem build_stage2_system(const LatinSquare &square,
                                                  const TransversalSet &ts,
                                                  const std::vector<std::size_t> &members,
                                                  const std::vector<CardinalityEquation> &extra) {
    const int n = square.order();
    const int cell_rows = n * n;
    exactcover::SystemBuilder b(cell_rows + static_cast<int>(extra.size()),
                                static_cast<int>(members.size()));
    for (std::size_t k = 0; k < members.size(); ++k)
        for (const Cell &c : ts.items[members[k]].cells())
            b.add_entry(c.row * n + c.col, static_cast<int>(k));
    for (std::size_t e = 0; e < extra.size(); ++e) {
        const auto &eq = extra[e];
        assert(eq.required >= 1);  // zero-count types are filtered out instead
        b.set_rhs(cell_rows + static_cast<int>(e), eq.required);
        for (std::size_t t : eq.subset) {
            const auto it = std::find(members.begin(), members.end(), t);
            if (it != members.end())
                b.add_entry(cell_rows + static_cast<int>(e),
                            static_cast<int>(it - members.begin()));
        }
    }
    return b.finalize();
}

std::vector<Transversal> family_from_solution(const TransversalSet &ts,
                                              const std::vector<std::size_t> &members,
                                              const exactcover::Solution &sol) {
    std::vector<Transversal> family;
    for (std::size_t k = 0; k < members.size(); ++k)
        if (sol.x[k])
            family.push_back(ts.items[members[k]]);
    return family;
}

} // namespace

Expected<TransversalSet, EpError> enumerate_transversals(const LatinSquare &square,
                                                         const exactcover::SolveControl &budget,
                                                         exactcover::SolveStats *stats_out) {
    const int n = square.order();
    exactcover::SystemBuilder b(3 * n, n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int col = i * n + j;
            b.add_entry(i, col);                        // one cell per row i
            b.add_entry(n + j, col);                    // one cell per column j
            b.add_entry(2 * n + square.at(i, j), col);  // one cell per symbol
        }
    const exactcover::DiophantineSystem sys = b.finalize();

    TransversalSet ts;
    ts.order = n;
    exactcover::SolveControl control = budget;
    control.max_solutions.reset();
    const exactcover::SolveStats stats = exactcover::solve_all(
        sys, control, [&](const exactcover::Solution &sol) {
            ts.items.push_back(transversal_from_solution(square, sol));
        });
    if (stats_out)
        *stats_out = stats;
    if (stats.budget_exhausted)
        return EpError{EpErrorKind::BudgetExhausted};
    // stage-1 solutions are distinct by construction; drop duplicates anyway
    std::set<std::vector<Cell>> seen;
    std::vector<Transversal> unique;
    for (auto &t : ts.items) {
        std::vector<Cell> key(t.cells().begin(), t.cells().end());
        if (seen.insert(std::move(key)).second)
            unique.push_back(std::move(t));
    }
    ts.items = std::move(unique);
    return ts;
}

Expected<EpOutcome, EpError> find_disjoint_family(const LatinSquare &square, const TransversalSet &ts,
                                                  const Stage2Constraints &extra,
                                                  const exactcover::SolveControl &budget) {
    const int n = square.order();
    EpOutcome out;
    out.stats.transversal_count = ts.items.size();
    if (static_cast<int>(ts.items.size()) < n) {
        out.status = EpStatus::NoMateFewTransversals;
        return out;
    }

    std::map<int, std::vector<std::size_t>> classes;
    if (extra.omega_partition) {
        assert(extra.omega_partition->size() == ts.items.size());
        for (std::size_t t = 0; t < ts.items.size(); ++t)
            classes[(*extra.omega_partition)[t]].push_back(t);
    } else {
        auto &all = classes[0];
        for (std::size_t t = 0; t < ts.items.size(); ++t)
            all.push_back(t);
    }

    const auto t0 = std::chrono::steady_clock::now();
    for (const auto &[label, members] : classes) {
        (void)label;
        if (static_cast<int>(members.size()) < n)
            continue;
        const exactcover::DiophantineSystem sys =
            build_stage2_system(square, ts, members, extra.extra_equations);
        exactcover::SolveStats stats;
        const auto sol = exactcover::solve_first(sys, budget, &stats);
        out.stats.stage2_nodes += stats.nodes;
        if (stats.budget_exhausted) {
            out.stats.stage2_seconds = seconds_since(t0);
            return EpError{EpErrorKind::BudgetExhausted};
        }
        if (sol) {
            out.chosen = family_from_solution(ts, members, *sol);
            auto mate = mate_from_transversals(square, out.chosen);
            assert(mate.ok());
            out.mate = mate.value();
            out.status = EpStatus::Mate;
            out.stats.stage2_seconds = seconds_since(t0);
            return out;
        }
    }
    out.status = EpStatus::NoMateNoDisjointFamily;
    out.stats.stage2_seconds = seconds_since(t0);
    return out;
}

Expected<std::uint64_t, EpError> enumerate_disjoint_families(
    const LatinSquare &square, const TransversalSet &ts,
    const std::function<void(const LatinSquare &, const std::vector<Transversal> &)> &emit,
    const Stage2Constraints &extra, const exactcover::SolveControl &budget) {
    const int n = square.order();
    if (static_cast<int>(ts.items.size()) < n)
        return std::uint64_t{0};
    std::vector<std::size_t> members(ts.items.size());
    for (std::size_t t = 0; t < members.size(); ++t)
        members[t] = t;
    const exactcover::DiophantineSystem sys =
        build_stage2_system(square, ts, members, extra.extra_equations);
    std::uint64_t families = 0;
    const exactcover::SolveStats stats =
        exactcover::solve_all(sys, budget, [&](const exactcover::Solution &sol) {
            ++families;
            const std::vector<Transversal> family = family_from_solution(ts, members, sol);
            auto mate = mate_from_transversals(square, family);
            assert(mate.ok());
            emit(mate.value(), family);
        });
    if (stats.budget_exhausted)
        return EpError{EpErrorKind::BudgetExhausted};
    return families;
}

Expected<EpOutcome, EpError> find_mates_myrvold(const LatinSquare &square,
                                                const MyrvoldColouring &colouring,
                                                const MyrvoldProfile &profile,
                                                const exactcover::SolveControl &budget) {
    const int n = square.order();
    const auto t0 = std::chrono::steady_clock::now();
    exactcover::SolveStats stage1_stats;
    auto stage1 = enumerate_transversals(square, budget, &stage1_stats);
    if (!stage1)
        return stage1.error();
    TransversalSet ts = std::move(stage1.value());
    const double stage1_seconds = seconds_since(t0);
    const std::size_t raw_count = ts.items.size();

    if (static_cast<int>(raw_count) < n) {
        EpOutcome out;
        out.status = EpStatus::NoMateFewTransversals;
        out.stats.stage1_seconds = stage1_seconds;
        out.stats.stage1_nodes = stage1_stats.nodes;
        out.stats.transversal_count = raw_count;
        return out;
    }

    // Classify and keep only the types the profile asks for.  A transversal
    // whose white/dark counts fit no type cannot appear in any family meeting
    // the per-type count equations (those demand n typed members), so it is
    // discarded along with the zero-count types.
    std::vector<Transversal> kept;
    std::vector<TransversalType> kept_types;
    std::size_t discarded_untyped = 0;
    for (const Transversal &t : ts.items) {
        auto type = classify_transversal(t, colouring);
        if (!type) {
            ++discarded_untyped;
            continue;
        }
        if (profile.count(type.value()) > 0) {
            kept.push_back(t);
            kept_types.push_back(type.value());
        }
    }
    ts.items = std::move(kept);

    Stage2Constraints extra;
    extra.profile = profile;
    for (int i = 1; i <= 4; ++i) {
        const auto type = static_cast<TransversalType>(i);
        if (profile.count(type) == 0)
            continue;
        CardinalityEquation eq;
        eq.required = profile.count(type);
        for (std::size_t t = 0; t < ts.items.size(); ++t)
            if (kept_types[t] == type)
                eq.subset.push_back(t);
        extra.extra_equations.push_back(std::move(eq));
    }
    for (int c = 0; c < 6; ++c) {
        CardinalityEquation eq;
        eq.required = profile.dark_quota[static_cast<std::size_t>(c)];
        for (std::size_t t = 0; t < ts.items.size(); ++t)
            for (const Cell &tc : ts.items[t].cells())
                if (tc.col == c && colouring.at(tc.row, tc.col) == CellColour::Dark) {
                    eq.subset.push_back(t);
                    break;
                }
        extra.extra_equations.push_back(std::move(eq));
    }

    if (profile.omega_filter) {
        const auto labeler = omega_labeler(*profile.omega_filter);
        assert(labeler);
        std::vector<int> labels;
        labels.reserve(ts.items.size());
        for (const Transversal &t : ts.items)
            labels.push_back((*labeler)(t));
        extra.omega_partition = std::move(labels);
    }

    EpOutcome out;
    if (static_cast<int>(ts.items.size()) < n) {
        // the profile filtered the set below n: the count equations cannot be met
        out.status = EpStatus::NoMateNoDisjointFamily;
    } else {
        auto outcome = find_disjoint_family(square, ts, extra, budget);
        if (!outcome)
            return outcome;
        out = std::move(outcome.value());
    }
    out.stats.stage1_seconds = stage1_seconds;
    out.stats.stage1_nodes = stage1_stats.nodes;
    out.stats.transversal_count = raw_count;
    out.stats.discarded_untyped = discarded_untyped;
    return out;
}

Expected<EpOutcome, EpError> find_mate(const LatinSquare &square,
                                       const exactcover::SolveControl &budget) {
    const auto t0 = std::chrono::steady_clock::now();
    exactcover::SolveStats stage1_stats;
    auto stage1 = enumerate_transversals(square, budget, &stage1_stats);
    if (!stage1)
        return stage1.error();
    const double stage1_seconds = seconds_since(t0);
    auto outcome = find_disjoint_family(square, stage1.value(), {}, budget);
    if (!outcome)
        return outcome;
    outcome.value().stats.stage1_seconds = stage1_seconds;
    outcome.value().stats.stage1_nodes = stage1_stats.nodes;
    return outcome;
}

std::optional<OmegaLabeler> omega_labeler(const std::string &id) {
    if (id == "all")
        return OmegaLabeler([](const Transversal &) { return 0; });
    if (id == "demo2")
        return OmegaLabeler([](const Transversal &t) {
            for (const Cell &c : t.cells())
                if (c.col == 0)
                    return c.row % 2;
            return 0;
        });
    return std::nullopt;
}

} // namespace mols::ep
