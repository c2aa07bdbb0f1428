#pragma once

#include <string_view>

#include "npdl/ast.hpp"
#include "npdl/diagnostics.hpp"

namespace npdl {

// Schema files (.nps): DOMAINS / INT-DOMAINS / PREDICATES sections plus
// MinInt / MaxInt assignments, each terminated by a period.
Schema parse_schema(std::string_view text);

// Program files (.npd): rules and an optional trailing query line.
Program parse_program(std::string_view text);

// Fact files (.npf): ground facts; unary facts over declared domain names
// populate extents. Derived domains and the `integer` range are materialized
// on the returned database.
Database parse_database(std::string_view text, const Schema& schema);

}  // namespace npdl
