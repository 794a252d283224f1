#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mols/encoder.hpp"

namespace mols::bench {

struct BenchRecord {
    std::string instance;  // e.g. "n10"
    std::int64_t seed = 0;
    std::string method;  // "pure" or "hybrid"
    std::string status;  // "sat", "unsat", "timeout"
    double total_s = 0.0;
    double sat_s = 0.0;
    double ep1_s = 0.0;
    double ep2_s = 0.0;
    std::uint64_t ep_calls = 0;
    std::uint64_t conflicts = 0;
    std::uint64_t restarts = 0;
};

// CSV schema: instance,seed,method,status,total_s,sat_s,ep1_s,ep2_s,ep_calls,
// conflicts,restarts (UTF-8, LF, header row first).
std::string csv_header();
std::string csv_row(const BenchRecord &record);

struct Summary {
    std::string instance;
    std::string method;
    int runs = 0;
    int completed = 0;
    // lower median over all runs with timeouts ranked last; absent when the
    // median lands on a timeout (fewer than half completed)
    std::optional<double> median_s;
    std::optional<double> min_s;
    std::optional<double> max_s;
};

std::vector<Summary> summarize(const std::vector<BenchRecord> &records);
std::string summary_block(const std::vector<Summary> &summaries);

// lower median of the sorted values
double lower_median(std::vector<double> values);

struct RunSpec {
    std::vector<int> orders;
    std::vector<std::string> methods{"hybrid"};
    std::vector<std::int64_t> seeds{1};
    double timeout_seconds = 3600.0;
    enc::CardinalityKind cardinality = enc::CardinalityKind::Pairwise;
    std::uint64_t ep_throttle = 1;
    int jobs = 1;
};

BenchRecord run_single(int order, const std::string &method, std::int64_t seed,
                       double timeout_seconds, enc::CardinalityKind cardinality,
                       std::uint64_t ep_throttle);

// Runs the full matrix; `sink` fires once per finished record (serialized),
// letting callers stream the CSV so an interrupted run keeps its rows.
std::vector<BenchRecord> run_matrix(const RunSpec &spec,
                                    const std::function<void(const BenchRecord &)> &sink);

} // namespace mols::bench
