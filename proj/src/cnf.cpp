#include "mols/cnf.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mols::enc {

void emit_dimacs(const Cnf &cnf, std::ostream &out) {
    out << "p cnf " << cnf.num_vars << ' ' << cnf.clauses.size() << '\n';
    for (const Clause &c : cnf.clauses) {
        for (Lit l : c)
            out << l << ' ';
        out << "0\n";
    }
}

Expected<Cnf, std::string> read_dimacs(std::istream &in) {
    Cnf cnf;
    std::string line;
    bool have_header = false;
    std::size_t declared_clauses = 0;
    Clause current;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == 'c')
            continue;
        if (line[0] == 'p') {
            std::istringstream hs(line);
            std::string p, fmt;
            if (!(hs >> p >> fmt >> cnf.num_vars >> declared_clauses) || fmt != "cnf")
                return std::string("bad DIMACS header");
            have_header = true;
            continue;
        }
        if (!have_header)
            return std::string("clause before header");
        std::istringstream ls(line);
        Lit l;
        while (ls >> l) {
            if (l == 0) {
                cnf.clauses.push_back(current);
                current.clear();
            } else {
                if (var_of(l) > cnf.num_vars)
                    return std::string("literal out of range");
                current.push_back(l);
            }
        }
    }
    if (!current.empty())
        return std::string("unterminated clause");
    if (!have_header)
        return std::string("missing header");
    if (cnf.clauses.size() != declared_clauses)
        return std::string("clause count differs from header");
    return cnf;
}

Expected<Cnf, std::string> read_dimacs_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        return std::string("cannot open " + path);
    return read_dimacs(in);
}

} // namespace mols::enc
