#pragma once

#include <string>
#include <vector>

#include "npdl/ast.hpp"
#include "npdl/fixpoint.hpp"
#include "npdl/model.hpp"

namespace npdl {

// Model text: declarations, minimize/maximize, subject-to block.
std::string emit_opl_model(const ConstraintModel& m);

// Data text: string/int sets for domains, tuple types and tuple sets for
// base relations, asSet(MinInt .. MaxInt) for the integer range.
std::string emit_opl_data(const Schema& schema, const Database& db);

// Data followed by the model. When `known` is given, known-value integer
// arrays are emitted with initializers taken from it.
std::string emit_opl(const ConstraintModel& m, const Schema& schema, const Database& db,
                     const Interpretation* known = nullptr);

// OPL-Script emulation of the naive stratified fixpoint: integer arrays,
// exit-rule loops, and a while(modified) block per recursive stratum.
std::string emit_fixp_script(const std::vector<Rule>& rules, const Schema& schema);

// Whitespace-insensitive token stream of OPL text, for golden comparisons.
std::vector<std::string> opl_tokens(const std::string& text);

}  // namespace npdl
