#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mols/expected.hpp"

namespace mols::enc {

// Literals use the DIMACS convention: nonzero signed variable index.
using Lit = std::int32_t;
using Clause = std::vector<Lit>;

inline int var_of(Lit l) { return l < 0 ? -l : l; }

struct Cnf {
    int num_vars = 0;
    std::vector<Clause> clauses;

    int new_var() { return ++num_vars; }
    void add(Clause clause) { clauses.push_back(std::move(clause)); }
    void add_unit(Lit l) { clauses.push_back({l}); }
};

// Header "p cnf V C" with exact counts, one zero-terminated clause per line,
// clauses in database order.
void emit_dimacs(const Cnf &cnf, std::ostream &out);

Expected<Cnf, std::string> read_dimacs(std::istream &in);
Expected<Cnf, std::string> read_dimacs_file(const std::string &path);

} // namespace mols::enc
