#include "mols/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "mols/hybrid.hpp"
#include "mols/satengine.hpp"

namespace mols::bench {

std::string csv_header() {
    return "instance,seed,method,status,total_s,sat_s,ep1_s,ep2_s,ep_calls,conflicts,restarts";
}

std::string csv_row(const BenchRecord &r) {
    std::ostringstream out;
    out << r.instance << ',' << r.seed << ',' << r.method << ',' << r.status << ',' << r.total_s
        << ',' << r.sat_s << ',' << r.ep1_s << ',' << r.ep2_s << ',' << r.ep_calls << ','
        << r.conflicts << ',' << r.restarts;
    return out.str();
}

double lower_median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

std::vector<Summary> summarize(const std::vector<BenchRecord> &records) {
    std::map<std::pair<std::string, std::string>, std::vector<const BenchRecord *>> groups;
    for (const BenchRecord &r : records)
        groups[{r.instance, r.method}].push_back(&r);
    std::vector<Summary> out;
    for (const auto &[key, rs] : groups) {
        Summary s;
        s.instance = key.first;
        s.method = key.second;
        s.runs = static_cast<int>(rs.size());
        std::vector<double> done_times;
        for (const BenchRecord *r : rs)
            if (r->status != "timeout")
                done_times.push_back(r->total_s);
        s.completed = static_cast<int>(done_times.size());
        std::sort(done_times.begin(), done_times.end());
        if (!done_times.empty())
            s.min_s = done_times.front();
        if (s.completed == s.runs && !done_times.empty())
            s.max_s = done_times.back();  // any timeout makes the max a timeout
        // lower median over all runs with timeouts ranked last; a median that
        // lands on a timeout is reported as absent
        const std::size_t median_rank = (rs.size() - 1) / 2;
        if (median_rank < done_times.size())
            s.median_s = done_times[median_rank];
        out.push_back(std::move(s));
    }
    return out;
}

std::string summary_block(const std::vector<Summary> &summaries) {
    std::ostringstream out;
    out << "instance,method,runs,completed,median_s,min_s,max_s\n";
    for (const Summary &s : summaries) {
        out << s.instance << ',' << s.method << ',' << s.runs << ',' << s.completed << ',';
        if (s.median_s)
            out << *s.median_s;
        else
            out << "timeout";
        out << ',';
        if (s.min_s)
            out << *s.min_s;
        else
            out << "timeout";
        out << ',';
        if (s.max_s)
            out << *s.max_s;
        else
            out << "timeout";
        out << '\n';
    }
    return out.str();
}

BenchRecord run_single(int order, const std::string &method, std::int64_t seed,
                       double timeout_seconds, enc::CardinalityKind cardinality,
                       std::uint64_t ep_throttle) {
    BenchRecord rec;
    rec.instance = "n" + std::to_string(order);
    rec.seed = seed;
    rec.method = method;

    if (method == "pure") {
        enc::EncodeConfig cfg;
        cfg.order = order;
        cfg.mode = enc::EncodeMode::PairWithChanneling;
        cfg.cardinality = cardinality;
        const enc::Encoded inst = enc::encode(cfg);
        sat::Solver solver;
        solver.ensure_vars(inst.cnf.num_vars);
        for (const auto &c : inst.cnf.clauses)
            solver.add_clause(std::span<const sat::Lit>(c.data(), c.size()));
        solver.set_option("shuffle_seed", seed);
        sat::Limits limits;
        limits.wall_seconds = timeout_seconds;
        const auto t0 = std::chrono::steady_clock::now();
        const sat::SolveResult res = solver.solve({}, limits);
        rec.total_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.sat_s = rec.total_s;
        rec.status = res.status == sat::Status::Sat
                         ? "sat"
                         : (res.status == sat::Status::Unsat ? "unsat" : "timeout");
        rec.conflicts = res.stats.conflicts;
        rec.restarts = res.stats.restarts;
        return rec;
    }

    enc::EncodeConfig cfg;
    cfg.order = order;
    cfg.mode = enc::EncodeMode::SingleSquare;
    cfg.cardinality = cardinality;
    const enc::Encoded inst = enc::encode(cfg);
    hybrid::HybridConfig hcfg;
    hcfg.ep_conflict_throttle = ep_throttle;
    hcfg.shuffle_seed = seed;
    sat::Limits limits;
    limits.wall_seconds = timeout_seconds;
    const hybrid::HybridResult res = hybrid::run_hybrid(inst.cnf, inst.map, hcfg, limits);
    rec.total_s = res.stats.total_seconds;
    rec.sat_s = res.stats.sat_seconds;
    rec.ep1_s = res.stats.ep_stage1_seconds;
    rec.ep2_s = res.stats.ep_stage2_seconds;
    rec.ep_calls = res.stats.ep_calls;
    rec.conflicts = res.engine.conflicts;
    rec.restarts = res.engine.restarts;
    rec.status = res.status == hybrid::HybridStatus::Found
                     ? "sat"
                     : (res.status == hybrid::HybridStatus::Unsat ? "unsat" : "timeout");
    return rec;
}

std::vector<BenchRecord> run_matrix(const RunSpec &spec,
                                    const std::function<void(const BenchRecord &)> &sink) {
    struct Job {
        int order;
        std::string method;
        std::int64_t seed;
    };
    std::vector<Job> jobs;
    for (const int order : spec.orders)
        for (const std::string &method : spec.methods)
            for (const std::int64_t seed : spec.seeds)
                jobs.push_back({order, method, seed});

    std::vector<BenchRecord> records(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex sink_mutex;
    const int workers = std::max(1, std::min<int>(spec.jobs, static_cast<int>(jobs.size())));

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size())
                return;
            const Job &j = jobs[i];
            BenchRecord rec = run_single(j.order, j.method, j.seed, spec.timeout_seconds,
                                         spec.cardinality, spec.ep_throttle);
            {
                std::lock_guard<std::mutex> lock(sink_mutex);
                if (sink)
                    sink(rec);
            }
            records[i] = std::move(rec);
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
    }
    return records;
}

} // namespace mols::bench
