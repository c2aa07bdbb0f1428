#pragma once

#include <string>

#include "npdl/ast.hpp"

namespace npdl {

std::string to_string(const Expr& e);
std::string to_string(const Atom& a);
std::string to_string(const Literal& l);
std::string to_string(const Conjunction& c);
std::string to_string(const Rule& r);
std::string to_string(const Goal& g);

// Canonical concrete syntax, re-parsable by parse_program. Rules print in
// program order with one rule per line.
std::string print_program(const Program& p);

}  // namespace npdl
