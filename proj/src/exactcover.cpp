#include "mols/exactcover.hpp"

#include <algorithm>
#include <cassert>
#include <istream>
#include <ostream>

namespace mols::exactcover {

SystemBuilder::SystemBuilder(int rows, int cols)
    : rows_(rows), cols_(cols), rhs_(static_cast<std::size_t>(rows), 1),
      bounds_(static_cast<std::size_t>(cols), 1) {}

Expected<bool, BuildError> SystemBuilder::add_entry(int row, int col) {
    if (row < 0 || row >= rows_ || col < 0 || col >= cols_)
        return BuildError{BuildErrorKind::IndexOutOfRange, row, col};
    for (const auto &[c, r] : entries_)
        if (c == col && r == row)
            return BuildError{BuildErrorKind::DuplicateEntry, row, col};
    entries_.emplace_back(col, row);
    return true;
}

Expected<bool, BuildError> SystemBuilder::set_rhs(int row, int value) {
    if (row < 0 || row >= rows_)
        return BuildError{BuildErrorKind::IndexOutOfRange, row, -1};
    if (value < 1)
        return BuildError{BuildErrorKind::BadValue, row, -1};
    rhs_[static_cast<std::size_t>(row)] = value;
    return true;
}

Expected<bool, BuildError> SystemBuilder::set_bound(int col, int value) {
    if (col < 0 || col >= cols_)
        return BuildError{BuildErrorKind::IndexOutOfRange, -1, col};
    if (value < 1)
        return BuildError{BuildErrorKind::BadValue, -1, col};
    bounds_[static_cast<std::size_t>(col)] = value;
    return true;
}

DiophantineSystem SystemBuilder::finalize() {
    std::sort(entries_.begin(), entries_.end());
    DiophantineSystem sys;
    sys.num_rows_ = rows_;
    sys.num_cols_ = cols_;
    sys.rhs_ = rhs_;
    sys.bounds_ = bounds_;
    sys.support_rows_.reserve(entries_.size());
    sys.col_begin_.assign(static_cast<std::size_t>(cols_) + 1, 0);
    for (const auto &[c, r] : entries_) {
        sys.support_rows_.push_back(r);
        sys.col_begin_[static_cast<std::size_t>(c) + 1]++;
    }
    for (int c = 0; c < cols_; ++c)
        sys.col_begin_[static_cast<std::size_t>(c) + 1] += sys.col_begin_[static_cast<std::size_t>(c)];
    return sys;
}

bool satisfies(const DiophantineSystem &system, const Solution &solution) {
    if (static_cast<int>(solution.x.size()) != system.num_cols())
        return false;
    std::vector<long> sum(static_cast<std::size_t>(system.num_rows()), 0);
    for (int c = 0; c < system.num_cols(); ++c) {
        const int v = solution.x[static_cast<std::size_t>(c)];
        if (v < 0 || v > system.bound(c))
            return false;
        if (v)
            for (int r : system.col_support(c))
                sum[static_cast<std::size_t>(r)] += v;
    }
    for (int r = 0; r < system.num_rows(); ++r)
        if (sum[static_cast<std::size_t>(r)] != system.rhs(r))
            return false;
    return true;
}

namespace {

// Mutable search state over a frozen system.  Row lists are doubly linked and
// pruned as choices become unusable; every mutation lands on a journal so
// backtracking restores the exact prior state.  A choice stays linked iff all
// rows it covers still need covering, so any linked choice is safe to pick.
class Searcher {
public:
    explicit Searcher(const DiophantineSystem &sys) : sys_(sys) {
        const int rows = sys.num_rows();
        const int cols = sys.num_cols();
        residual_.resize(static_cast<std::size_t>(rows));
        for (int r = 0; r < rows; ++r)
            residual_[static_cast<std::size_t>(r)] = sys.rhs(r);
        x_.assign(static_cast<std::size_t>(cols), 0);
        hidden_.assign(static_cast<std::size_t>(cols), 0);
        col_nodes_.resize(static_cast<std::size_t>(cols));
        row_count_.assign(static_cast<std::size_t>(rows), 0);

        nodes_.resize(static_cast<std::size_t>(rows));  // row sentinels
        for (int r = 0; r < rows; ++r) {
            Node &s = nodes_[static_cast<std::size_t>(r)];
            s.prev = s.next = r;
            s.row = r;
            s.col = -1;
        }
        // Entries arrive grouped by column; appending each node to its row list
        // keeps the lists sorted by column index.
        for (int c = 0; c < cols; ++c)
            for (int r : sys.col_support(c)) {
                const int id = static_cast<int>(nodes_.size());
                Node n;
                n.row = r;
                n.col = c;
                n.prev = nodes_[static_cast<std::size_t>(r)].prev;
                n.next = r;
                nodes_.push_back(n);
                nodes_[static_cast<std::size_t>(n.prev)].next = id;
                nodes_[static_cast<std::size_t>(r)].prev = id;
                col_nodes_[static_cast<std::size_t>(c)].push_back(id);
                row_count_[static_cast<std::size_t>(r)]++;
            }
        open_rows_ = rows;  // rhs entries are >= 1
        for (int c = 0; c < cols; ++c)
            if (sys.col_support(c).empty())
                free_cols_.push_back(c);
    }

    SolveStats run(const SolveControl &control, const std::function<void(const Solution &)> &emit) {
        control_ = &control;
        emit_ = &emit;
        stats_ = SolveStats{};
        if (feasible_at_root())
            search();
        return stats_;
    }

private:
    struct Node {
        int prev = 0, next = 0;
        int row = 0, col = 0;
    };
    enum class Op : std::uint8_t { Unlink, Hide, DecResidual, IncX };
    struct Journal {
        Op op;
        int arg;
    };

    // Rows whose demand exceeds the total available coverage make the system
    // infeasible without search.
    bool feasible_at_root() const {
        std::vector<long> capacity(static_cast<std::size_t>(sys_.num_rows()), 0);
        for (int c = 0; c < sys_.num_cols(); ++c)
            for (int r : sys_.col_support(c))
                capacity[static_cast<std::size_t>(r)] += sys_.bound(c);
        for (int r = 0; r < sys_.num_rows(); ++r)
            if (capacity[static_cast<std::size_t>(r)] < sys_.rhs(r))
                return false;
        return true;
    }

    bool linked(int id) const {
        const Node &n = nodes_[static_cast<std::size_t>(id)];
        return nodes_[static_cast<std::size_t>(n.prev)].next == id;
    }

    void unlink(int id) {
        Node &n = nodes_[static_cast<std::size_t>(id)];
        nodes_[static_cast<std::size_t>(n.prev)].next = n.next;
        nodes_[static_cast<std::size_t>(n.next)].prev = n.prev;
        row_count_[static_cast<std::size_t>(n.row)]--;
        journal_.push_back({Op::Unlink, id});
    }

    void relink(int id) {
        Node &n = nodes_[static_cast<std::size_t>(id)];
        nodes_[static_cast<std::size_t>(n.prev)].next = id;
        nodes_[static_cast<std::size_t>(n.next)].prev = id;
        row_count_[static_cast<std::size_t>(n.row)]++;
    }

    void hide_choice(int c) {
        hidden_[static_cast<std::size_t>(c)] = 1;
        journal_.push_back({Op::Hide, c});
        for (int id : col_nodes_[static_cast<std::size_t>(c)])
            if (linked(id))
                unlink(id);
    }

    void close_row(int r) {
        int id;
        while ((id = nodes_[static_cast<std::size_t>(r)].next) != r)
            hide_choice(nodes_[static_cast<std::size_t>(id)].col);
        --open_rows_;
    }

    void pick(int c) {
        assert(!hidden_[static_cast<std::size_t>(c)]);
        x_[static_cast<std::size_t>(c)]++;
        journal_.push_back({Op::IncX, c});
        for (int r : sys_.col_support(c)) {
            assert(residual_[static_cast<std::size_t>(r)] >= 1);
            residual_[static_cast<std::size_t>(r)]--;
            journal_.push_back({Op::DecResidual, r});
        }
        for (int r : sys_.col_support(c))
            if (residual_[static_cast<std::size_t>(r)] == 0)
                close_row(r);  // hides every choice touching r, including c
        if (!hidden_[static_cast<std::size_t>(c)] && x_[static_cast<std::size_t>(c)] == sys_.bound(c))
            hide_choice(c);
    }

    void undo_to(std::size_t mark) {
        while (journal_.size() > mark) {
            const Journal j = journal_.back();
            journal_.pop_back();
            switch (j.op) {
            case Op::Unlink:
                relink(j.arg);
                break;
            case Op::Hide:
                hidden_[static_cast<std::size_t>(j.arg)] = 0;
                break;
            case Op::DecResidual:
                if (residual_[static_cast<std::size_t>(j.arg)] == 0)
                    ++open_rows_;
                residual_[static_cast<std::size_t>(j.arg)]++;
                break;
            case Op::IncX:
                x_[static_cast<std::size_t>(j.arg)]--;
                break;
            }
        }
    }

    // Emits the current cover once per value combination of the columns no
    // equation touches; such columns may take any value within their bounds.
    bool emit_with_free_columns() {
        Solution s;
        s.x = x_;
        for (;;) {
            stats_.solutions++;
            (*emit_)(s);
            if (control_->max_solutions && stats_.solutions >= *control_->max_solutions)
                return false;
            std::size_t f = 0;
            for (; f < free_cols_.size(); ++f) {
                const int c = free_cols_[f];
                if (s.x[static_cast<std::size_t>(c)] < sys_.bound(c)) {
                    s.x[static_cast<std::size_t>(c)]++;
                    break;
                }
                s.x[static_cast<std::size_t>(c)] = 0;
            }
            if (f == free_cols_.size())
                return true;
        }
    }

    // Returns false to stop the whole search (solution cap or budget reached).
    bool search() {
        if (open_rows_ == 0)
            return emit_with_free_columns();
        int best = -1, best_count = 0;
        for (int r = 0; r < sys_.num_rows(); ++r) {
            if (residual_[static_cast<std::size_t>(r)] == 0)
                continue;
            const int cnt = row_count_[static_cast<std::size_t>(r)];
            if (cnt == 0)
                return true;  // open row with no usable choice: dead end
            if (best == -1 || cnt < best_count) {
                best = r;
                best_count = cnt;
            }
        }
        return cover_row(best, 0);
    }

    // Covers row r with columns picked in nondecreasing index order; the row
    // stays selected until its residual reaches zero, which makes every
    // solution reachable along exactly one path.
    bool cover_row(int r, int min_col) {
        std::vector<int> candidates;
        for (int id = nodes_[static_cast<std::size_t>(r)].next; id != r;
             id = nodes_[static_cast<std::size_t>(id)].next)
            if (nodes_[static_cast<std::size_t>(id)].col >= min_col)
                candidates.push_back(nodes_[static_cast<std::size_t>(id)].col);
        for (int c : candidates) {
            if (control_->node_budget && stats_.nodes >= *control_->node_budget) {
                stats_.budget_exhausted = true;
                return false;
            }
            stats_.nodes++;
            const std::size_t mark = journal_.size();
            pick(c);
            const bool keep_going =
                residual_[static_cast<std::size_t>(r)] == 0 ? search() : cover_row(r, c);
            undo_to(mark);
            if (!keep_going)
                return false;
        }
        return true;
    }

    const DiophantineSystem &sys_;
    const SolveControl *control_ = nullptr;
    const std::function<void(const Solution &)> *emit_ = nullptr;
    SolveStats stats_;

    std::vector<Node> nodes_;
    std::vector<std::vector<int>> col_nodes_;
    std::vector<int> residual_;
    std::vector<int> x_;
    std::vector<std::uint8_t> hidden_;
    std::vector<int> row_count_;
    std::vector<Journal> journal_;
    std::vector<int> free_cols_;
    int open_rows_ = 0;
};

} // namespace

SolveStats solve_all(const DiophantineSystem &system, const SolveControl &control,
                     const std::function<void(const Solution &)> &emit) {
    Searcher s(system);
    return s.run(control, emit);
}

std::optional<Solution> solve_first(const DiophantineSystem &system, const SolveControl &control,
                                    SolveStats *stats_out) {
    SolveControl c = control;
    c.max_solutions = 1;
    std::optional<Solution> found;
    SolveStats stats = solve_all(system, c, [&](const Solution &s) { found = s; });
    if (stats_out)
        *stats_out = stats;
    return found;
}

void write_system(std::ostream &out, const DiophantineSystem &system) {
    out << system.num_rows() << ' ' << system.num_cols() << '\n';
    out << system.entry_count() << '\n';
    for (int c = 0; c < system.num_cols(); ++c)
        for (int r : system.col_support(c))
            out << r << ' ' << c << '\n';
    for (int r = 0; r < system.num_rows(); ++r)
        out << (r ? " " : "") << system.rhs(r);
    out << '\n';
    for (int c = 0; c < system.num_cols(); ++c)
        out << (c ? " " : "") << system.bound(c);
    out << '\n';
}

Expected<DiophantineSystem, std::string> read_system(std::istream &in) {
    int rows = 0, cols = 0;
    std::size_t entries = 0;
    if (!(in >> rows >> cols >> entries))
        return std::string("bad header");
    SystemBuilder b(rows, cols);
    for (std::size_t e = 0; e < entries; ++e) {
        int r = 0, c = 0;
        if (!(in >> r >> c))
            return std::string("truncated entries");
        if (!b.add_entry(r, c))
            return std::string("bad entry");
    }
    for (int r = 0; r < rows; ++r) {
        int v = 0;
        if (!(in >> v) || !b.set_rhs(r, v))
            return std::string("bad rhs");
    }
    for (int c = 0; c < cols; ++c) {
        int v = 0;
        if (!(in >> v) || !b.set_bound(c, v))
            return std::string("bad bounds");
    }
    return b.finalize();
}

} // namespace mols::exactcover
