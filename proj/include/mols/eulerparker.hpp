#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mols/exactcover.hpp"
#include "mols/expected.hpp"
#include "mols/latin.hpp"

namespace mols::ep {

// Deduplicated transversals of one host square, in the solver's deterministic
// emission order.
struct TransversalSet {
    int order = 0;
    std::vector<Transversal> items;
};

enum class EpStatus { NoMateFewTransversals, NoMateNoDisjointFamily, Mate };

struct EpStats {
    double stage1_seconds = 0.0;
    double stage2_seconds = 0.0;
    std::uint64_t stage1_nodes = 0;
    std::uint64_t stage2_nodes = 0;
    std::size_t transversal_count = 0;
    std::size_t discarded_untyped = 0;  // Myrvold runs: transversals fitting no type
};

struct EpOutcome {
    EpStatus status = EpStatus::NoMateFewTransversals;
    std::optional<LatinSquare> mate;
    std::vector<Transversal> chosen;
    EpStats stats;
};

struct CardinalityEquation {
    std::vector<std::size_t> subset;  // indexes into the transversal set
    int required = 0;
};

struct Stage2Constraints {
    std::optional<MyrvoldProfile> profile;          // provenance of generated equations
    std::optional<std::vector<int>> omega_partition;  // class label per transversal
    std::vector<CardinalityEquation> extra_equations;
};

enum class EpErrorKind { BudgetExhausted };
struct EpError {
    EpErrorKind kind;
};

// Stage 1: all transversals of the square via the n^2-variable, 3n-equation
// system (one equation per row, column, and symbol).  An exhausted budget is
// a hard failure; partial sets are never returned.
Expected<TransversalSet, EpError> enumerate_transversals(const LatinSquare &square,
                                                         const exactcover::SolveControl &budget = {},
                                                         exactcover::SolveStats *stats_out = nullptr);

// Stage 2: select n pairwise disjoint transversals covering every cell, plus
// any extra cardinality equations, solving each omega class separately.
Expected<EpOutcome, EpError> find_disjoint_family(const LatinSquare &square, const TransversalSet &ts,
                                                  const Stage2Constraints &extra = {},
                                                  const exactcover::SolveControl &budget = {});

// Exhaustive variant: every disjoint family, streamed as mates.  Returns the
// family count (or the budget failure).
Expected<std::uint64_t, EpError> enumerate_disjoint_families(
    const LatinSquare &square, const TransversalSet &ts,
    const std::function<void(const LatinSquare &mate, const std::vector<Transversal> &family)> &emit,
    const Stage2Constraints &extra = {}, const exactcover::SolveControl &budget = {});

// Both stages with the Myrvold specialization: transversals are classified
// against the colouring; types absent from the profile and transversals whose
// white/dark counts fit no type are discarded, and stage 2 runs once per
// omega class with the per-type count equations and the per-column dark quota
// equations attached.
Expected<EpOutcome, EpError> find_mates_myrvold(const LatinSquare &square,
                                                const MyrvoldColouring &colouring,
                                                const MyrvoldProfile &profile,
                                                const exactcover::SolveControl &budget = {});

// Convenience driver: stage 1 followed by stage 2.
Expected<EpOutcome, EpError> find_mate(const LatinSquare &square,
                                       const exactcover::SolveControl &budget = {});

// Omega class labelers, keyed by MyrvoldProfile::omega_filter.  The default
// (unset id) is a single all-pass class; "demo2" splits transversals by the
// parity of their column-0 row, exercising the double-run path.
using OmegaLabeler = std::function<int(const Transversal &)>;
std::optional<OmegaLabeler> omega_labeler(const std::string &id);

} // namespace mols::ep
