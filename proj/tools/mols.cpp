// Command-line surface for the orthogonal-Latin-square toolkit: encode
// instances to DIMACS, run pure or hybrid solves, verify artifacts, list
// transversals, and run the seeded benchmark matrix.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mols/bench.hpp"
#include "mols/cnf.hpp"
#include "mols/encoder.hpp"
#include "mols/eulerparker.hpp"
#include "mols/hybrid.hpp"
#include "mols/latin.hpp"
#include "mols/satengine.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

std::vector<int> parse_int_list(const std::string &text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(std::stoi(item));
    return out;
}

std::vector<std::int64_t> parse_seed_list(const std::string &text) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(std::stoll(item));
    return out;
}

// Profile file: a "counts p1 p2 p3 p4" line, optionally "omega <id>".
mols::Expected<mols::MyrvoldProfile, std::string> read_profile_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        return std::string("cannot open " + path);
    mols::MyrvoldProfile profile;
    bool have_counts = false;
    std::string word;
    while (in >> word) {
        if (word == "counts") {
            for (int i = 0; i < 4; ++i)
                if (!(in >> profile.type_counts[static_cast<std::size_t>(i)]))
                    return std::string("profile: expected four counts");
            have_counts = true;
        } else if (word == "omega") {
            std::string id;
            in >> id;
            profile.omega_filter = id;
        } else {
            return std::string("profile: unknown directive " + word);
        }
    }
    if (!have_counts || profile.total() != 10)
        return std::string("profile: counts must sum to 10");
    return profile;
}

mols::Expected<mols::MyrvoldProfile, std::string> resolve_profile(const std::string &pair_type,
                                                                  const std::string &profile_path) {
    if (!profile_path.empty())
        return read_profile_file(profile_path);
    auto preset = mols::MyrvoldProfile::preset(pair_type);
    if (!preset)
        return std::string("unknown pair type " + pair_type + " (presets: R, XX)");
    return *preset;
}

bool write_text_file(const std::string &path, const std::string &body) {
    std::ofstream out(path);
    out << body;
    return static_cast<bool>(out);
}

void write_transversals_file(std::ostream &out, std::span<const mols::Transversal> ts) {
    for (const mols::Transversal &t : ts) {
        bool first = true;
        for (const mols::Cell &c : t.cells()) {
            out << (first ? "" : " ") << c.row << ' ' << c.col;
            first = false;
        }
        out << '\n';
    }
}

int cmd_encode(int order, const std::string &mode, const std::string &card,
               const std::string &first_row, const std::string &pair_type,
               const std::string &profile_path, bool channel_r, const std::string &out_base) {
    mols::enc::EncodeConfig cfg;
    cfg.order = order;
    cfg.cardinality = card == "totalizer" ? mols::enc::CardinalityKind::Totalizer
                                          : mols::enc::CardinalityKind::Pairwise;
    if (mode == "single")
        cfg.mode = mols::enc::EncodeMode::SingleSquare;
    else if (mode == "pair")
        cfg.mode = mols::enc::EncodeMode::PairWithChanneling;
    else if (mode == "myrvold")
        cfg.mode = mols::enc::EncodeMode::MyrvoldPair;
    else {
        std::cerr << "encode: unknown mode " << mode << '\n';
        return kExitUsage;
    }
    if (!first_row.empty())
        cfg.fixed_first_row = parse_int_list(first_row);
    if (cfg.mode == mols::enc::EncodeMode::MyrvoldPair) {
        if (order != 10) {
            std::cerr << "encode: myrvold mode requires --order 10\n";
            return kExitUsage;
        }
        auto profile = resolve_profile(pair_type, profile_path);
        if (!profile) {
            std::cerr << "encode: " << profile.error() << '\n';
            return kExitUsage;
        }
        cfg.profile = profile.value();
        cfg.myrvold_channel_r = channel_r;
    }

    const mols::enc::Encoded inst = mols::enc::encode(cfg);
    {
        std::ofstream out(out_base + ".cnf");
        if (!out) {
            std::cerr << "encode: cannot write " << out_base << ".cnf\n";
            return kExitIo;
        }
        mols::enc::emit_dimacs(inst.cnf, out);
        if (!out)
            return kExitIo;
    }
    {
        std::ofstream out(out_base + ".map");
        if (!out) {
            std::cerr << "encode: cannot write " << out_base << ".map\n";
            return kExitIo;
        }
        inst.map.write_sidecar(out);
        if (!out)
            return kExitIo;
    }
    std::cout << "wrote " << out_base << ".cnf (" << inst.cnf.num_vars << " vars, "
              << inst.cnf.clauses.size() << " clauses) and " << out_base << ".map\n";
    return kExitOk;
}

int cmd_solve(int order, const std::string &mode, const std::string &card, std::int64_t seed,
              double timeout, std::uint64_t ep_throttle, const std::string &pair_type,
              const std::string &profile_path, bool enumerate_all, std::uint64_t max_blocks,
              const std::string &out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "solve: cannot create " << out_dir << '\n';
        return kExitIo;
    }
    const auto card_kind = card == "totalizer" ? mols::enc::CardinalityKind::Totalizer
                                               : mols::enc::CardinalityKind::Pairwise;

    const bool myrvold = mode == "myrvold";
    std::string status;
    std::string record;
    std::optional<mols::LatinSquare> square, mate;
    std::vector<mols::Transversal> transversals;

    if (mode == "pure") {
        mols::enc::EncodeConfig cfg;
        cfg.order = order;
        cfg.mode = mols::enc::EncodeMode::PairWithChanneling;
        cfg.cardinality = card_kind;
        const mols::enc::Encoded inst = mols::enc::encode(cfg);
        mols::sat::Solver solver;
        solver.ensure_vars(inst.cnf.num_vars);
        for (const auto &c : inst.cnf.clauses)
            solver.add_clause(std::span<const mols::sat::Lit>(c.data(), c.size()));
        solver.set_option("shuffle_seed", seed);
        mols::sat::Limits limits;
        if (timeout > 0)
            limits.wall_seconds = timeout;
        const auto res = solver.solve({}, limits);
        status = res.status == mols::sat::Status::Sat
                     ? "sat"
                     : (res.status == mols::sat::Status::Unsat ? "unsat" : "timeout");
        if (res.status == mols::sat::Status::Sat) {
            auto p = mols::enc::decode_square(res.model, inst.map, mols::enc::SquareId::P);
            auto r = mols::enc::decode_square(res.model, inst.map, mols::enc::SquareId::R);
            if (!p.ok() || !r.ok()) {
                std::cerr << "solve: model decode failed\n";
                return kExitVerifyFail;
            }
            square = p.value();
            mate = r.value();
            // symbol classes of the mate are the transversal decomposition
            for (int k = 0; k < order; ++k) {
                std::vector<mols::Cell> cells;
                for (int i = 0; i < order; ++i)
                    for (int j = 0; j < order; ++j)
                        if (mate->at(i, j) == k)
                            cells.push_back(mols::Cell{i, j});
                transversals.push_back(mols::Transversal::unchecked(order, std::move(cells)));
            }
        }
        record = "seed=" + std::to_string(seed) + " mode=pure pair_type=none status=" + status +
                 " " + mols::sat::stats_line(res.stats);
    } else if (mode == "hybrid" || myrvold) {
        mols::enc::EncodeConfig cfg;
        cfg.order = order;
        cfg.cardinality = card_kind;
        mols::hybrid::HybridConfig hcfg;
        hcfg.ep_conflict_throttle = ep_throttle;
        hcfg.shuffle_seed = seed;
        hcfg.enumerate_all = enumerate_all;
        if (max_blocks > 0)
            hcfg.max_blocks = max_blocks;
        std::string pt = "none";
        if (myrvold) {
            if (order != 10) {
                std::cerr << "solve: myrvold mode requires --order 10\n";
                return kExitUsage;
            }
            auto profile = resolve_profile(pair_type, profile_path);
            if (!profile) {
                std::cerr << "solve: " << profile.error() << '\n';
                return kExitUsage;
            }
            cfg.mode = mols::enc::EncodeMode::MyrvoldPair;
            cfg.profile = profile.value();
            hcfg.profile = profile.value();
            hcfg.watched = {mols::enc::SquareId::P, mols::enc::SquareId::Q};
            pt = pair_type.empty() ? "custom" : pair_type;
        } else {
            cfg.mode = mols::enc::EncodeMode::SingleSquare;
        }
        const mols::enc::Encoded inst = mols::enc::encode(cfg);
        mols::sat::Limits limits;
        if (timeout > 0)
            limits.wall_seconds = timeout;
        const auto res = mols::hybrid::run_hybrid(inst.cnf, inst.map, hcfg, limits);
        status = res.status == mols::hybrid::HybridStatus::Found
                     ? "sat"
                     : (res.status == mols::hybrid::HybridStatus::Unsat ? "unsat" : "timeout");
        if (res.status == mols::hybrid::HybridStatus::Found) {
            square = res.square;
            mate = res.mate;
            transversals = res.transversals;
        }
        record = mols::hybrid::stats_record(res, seed, mode, pt) + " " +
                 mols::sat::stats_line(res.engine);
    } else {
        std::cerr << "solve: unknown mode " << mode << '\n';
        return kExitUsage;
    }

    if (square) {
        if (!mols::write_square_file(out_dir + "/square.txt", *square))
            return kExitIo;
        if (mate && !mols::write_square_file(out_dir + "/mate.txt", *mate))
            return kExitIo;
        std::ofstream tout(out_dir + "/transversals.txt");
        write_transversals_file(tout, transversals);
        if (!tout)
            return kExitIo;
    }
    if (!write_text_file(out_dir + "/stats.txt", record + "\n"))
        return kExitIo;
    std::cout << record << '\n';
    return kExitOk;
}

int cmd_verify(const std::string &square_path, const std::string &mate_path,
               const std::string &trp_path, const std::string &dark_path) {
    auto square = mols::read_square_file(square_path);
    if (!square) {
        std::cerr << "verify: square: " << square.error().what << '\n';
        return square.error().what.rfind("cannot open", 0) == 0 ? kExitIo : kExitVerifyFail;
    }
    std::cout << "square: valid (order " << square.value().order() << ")\n";

    if (!mate_path.empty()) {
        auto mate = mols::read_square_file(mate_path);
        if (!mate) {
            std::cerr << "verify: mate: " << mate.error().what << '\n';
            return mate.error().what.rfind("cannot open", 0) == 0 ? kExitIo : kExitVerifyFail;
        }
        if (mate.value().order() != square.value().order() ||
            !mols::are_orthogonal(square.value(), mate.value())) {
            std::cerr << "verify: FAILED orthogonality check\n";
            return kExitVerifyFail;
        }
        std::cout << "mate: orthogonal\n";
    }
    if (!trp_path.empty()) {
        auto q = mols::read_square_file(trp_path);
        if (!q) {
            std::cerr << "verify: trp: " << q.error().what << '\n';
            return q.error().what.rfind("cannot open", 0) == 0 ? kExitIo : kExitVerifyFail;
        }
        if (q.value().order() != square.value().order() ||
            !mols::verify_trp(square.value(), q.value())) {
            std::cerr << "verify: FAILED transversal-representation check\n";
            return kExitVerifyFail;
        }
        std::cout << "trp: rows represent transversals\n";
    }
    if (!dark_path.empty()) {
        std::ifstream in(dark_path);
        if (!in) {
            std::cerr << "verify: cannot open " << dark_path << '\n';
            return kExitIo;
        }
        auto darks = mols::read_dark_cells(in);
        if (!darks) {
            std::cerr << "verify: dark: " << darks.error().what << '\n';
            return kExitVerifyFail;
        }
        auto colouring = mols::colour(square.value(), darks.value());
        if (!colouring) {
            std::cerr << "verify: FAILED colouring check (dark quota or white cell)\n";
            return kExitVerifyFail;
        }
        std::cout << "colouring: two dark cells in each of the first six columns\n";
    }
    std::cout << "all checks passed\n";
    return kExitOk;
}

int cmd_transversals(const std::string &square_path, const std::string &out_path) {
    auto square = mols::read_square_file(square_path);
    if (!square) {
        std::cerr << "transversals: " << square.error().what << '\n';
        return square.error().what.rfind("cannot open", 0) == 0 ? kExitIo : kExitVerifyFail;
    }
    auto ts = mols::ep::enumerate_transversals(square.value());
    if (!ts) {
        std::cerr << "transversals: budget exhausted\n";
        return kExitVerifyFail;
    }
    std::cout << ts.value().items.size() << '\n';
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        write_transversals_file(out, ts.value().items);
        if (!out)
            return kExitIo;
    }
    return kExitOk;
}

int cmd_bench(const std::string &orders, const std::string &methods, const std::string &seeds,
              double timeout, int jobs, const std::string &card, std::uint64_t ep_throttle,
              const std::string &out_path) {
    mols::bench::RunSpec spec;
    spec.orders = parse_int_list(orders);
    spec.seeds = parse_seed_list(seeds);
    spec.methods.clear();
    {
        std::stringstream ss(methods);
        std::string m;
        while (std::getline(ss, m, ','))
            if (!m.empty())
                spec.methods.push_back(m);
    }
    if (spec.orders.empty() || spec.methods.empty() || spec.seeds.empty()) {
        std::cerr << "bench: empty matrix\n";
        return kExitUsage;
    }
    for (const std::string &m : spec.methods)
        if (m != "pure" && m != "hybrid") {
            std::cerr << "bench: unknown method " << m << '\n';
            return kExitUsage;
        }
    spec.timeout_seconds = timeout;
    spec.jobs = jobs;
    spec.ep_throttle = ep_throttle;
    spec.cardinality = card == "totalizer" ? mols::enc::CardinalityKind::Totalizer
                                           : mols::enc::CardinalityKind::Pairwise;

    std::ofstream csv(out_path);
    if (!csv) {
        std::cerr << "bench: cannot write " << out_path << '\n';
        return kExitIo;
    }
    csv << mols::bench::csv_header() << '\n';
    csv.flush();
    const auto records = mols::bench::run_matrix(spec, [&](const mols::bench::BenchRecord &r) {
        csv << mols::bench::csv_row(r) << '\n';
        csv.flush();  // partial CSV survives an interrupt
    });
    const auto summaries = mols::bench::summarize(records);
    std::cout << mols::bench::summary_block(summaries);
    if (!csv)
        return kExitIo;
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Orthogonal Latin square search toolkit"};
    app.require_subcommand(1);

    int order = 5;
    std::string mode = "single";
    std::string card = "pairwise";
    std::string first_row, pair_type = "XX", profile_path, out_base = "instance";
    bool channel_r = false;
    auto *encode = app.add_subcommand("encode", "write a DIMACS instance and its variable map");
    encode->add_option("--order", order, "square order n")->required();
    encode->add_option("--mode", mode, "single | pair | myrvold");
    encode->add_option("--card", card, "pairwise | totalizer");
    encode->add_option("--first-row", first_row, "fix the first row, e.g. 0,1,2");
    encode->add_option("--pair-type", pair_type, "Myrvold preset: R or XX");
    encode->add_option("--profile", profile_path, "Myrvold profile file");
    encode->add_flag("--channel-r", channel_r, "also channel to an R square (myrvold)");
    encode->add_option("--out", out_base, "output path base");

    int s_order = 8;
    std::string s_mode = "hybrid", s_card = "pairwise", s_pair_type = "XX", s_profile, s_out = "run";
    std::int64_t s_seed = 0;
    double s_timeout = 0.0;
    std::uint64_t s_throttle = 1, s_max_blocks = 0;
    bool s_enumerate = false;
    auto *solve = app.add_subcommand("solve", "search for an orthogonal pair");
    solve->add_option("--order", s_order, "square order n")->required();
    solve->add_option("--mode", s_mode, "pure | hybrid | myrvold");
    solve->add_option("--card", s_card, "pairwise | totalizer");
    solve->add_option("--seed", s_seed, "score-shuffle seed (0 = no shuffle)");
    solve->add_option("--timeout", s_timeout, "wall-clock limit in seconds (0 = none)");
    solve->add_option("--ep-throttle", s_throttle,
                      "native conflicts required between Euler-Parker calls");
    solve->add_option("--pair-type", s_pair_type, "Myrvold preset: R or XX");
    solve->add_option("--profile", s_profile, "Myrvold profile file");
    solve->add_flag("--enumerate", s_enumerate, "block mates too and keep enumerating");
    solve->add_option("--max-blocks", s_max_blocks, "stop after this many blocked squares");
    solve->add_option("--out", s_out, "output directory");

    std::string v_square, v_mate, v_trp, v_dark;
    auto *verify = app.add_subcommand("verify", "check squares, mates, TRPs, and colourings");
    verify->add_option("--square", v_square, "square file")->required();
    verify->add_option("--mate", v_mate, "orthogonal mate file");
    verify->add_option("--trp", v_trp, "partner square whose rows must be transversals");
    verify->add_option("--dark", v_dark, "dark-cell sidecar (12 \"row col\" lines)");

    std::string t_square, t_out;
    auto *transversals = app.add_subcommand("transversals", "enumerate all transversals");
    transversals->add_option("--square", t_square, "square file")->required();
    transversals->add_option("--out", t_out, "write the listing here");

    std::string b_orders = "8,9,10", b_methods = "hybrid", b_seeds = "1,2,3,4,5";
    std::string b_card = "pairwise", b_out = "bench.csv";
    double b_timeout = 3600.0;
    int b_jobs = 1;
    std::uint64_t b_throttle = 1;
    auto *bench = app.add_subcommand("bench", "run the seeded benchmark matrix");
    bench->add_option("--orders", b_orders, "comma-separated orders");
    bench->add_option("--methods", b_methods, "comma-separated: pure,hybrid");
    bench->add_option("--seeds", b_seeds, "comma-separated seeds");
    bench->add_option("--timeout", b_timeout, "per-run wall-clock limit in seconds");
    bench->add_option("--jobs", b_jobs, "parallel workers");
    bench->add_option("--card", b_card, "pairwise | totalizer");
    bench->add_option("--ep-throttle", b_throttle, "hybrid EP throttle");
    bench->add_option("--out", b_out, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (encode->parsed())
            return cmd_encode(order, mode, card, first_row, pair_type, profile_path, channel_r,
                              out_base);
        if (solve->parsed())
            return cmd_solve(s_order, s_mode, s_card, s_seed, s_timeout, s_throttle, s_pair_type,
                             s_profile, s_enumerate, s_max_blocks, s_out);
        if (verify->parsed())
            return cmd_verify(v_square, v_mate, v_trp, v_dark);
        if (transversals->parsed())
            return cmd_transversals(t_square, t_out);
        if (bench->parsed())
            return cmd_bench(b_orders, b_methods, b_seeds, b_timeout, b_jobs, b_card, b_throttle,
                             b_out);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitVerifyFail;
    }
    return kExitUsage;
}
