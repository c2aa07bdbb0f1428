#pragma once

#include <functional>
#include <optional>
#include <set>

#include "npdl/ast.hpp"
#include "npdl/ground.hpp"

namespace npdl {

enum class SolveMode { First, All, Optimize };

struct Solution {
  std::vector<int> values;  // one value per cell, in cell-id order
  std::optional<std::int64_t> objective;
};

struct SolveLimits {
  long long node_limit = -1;     // decisions; -1 = unlimited
  double time_limit_s = -1;      // wall clock; -1 = unlimited
};

enum class SolveStatus { Done, ResourceLimit };

struct SolveResult {
  SolveStatus status = SolveStatus::Done;
  std::vector<Solution> solutions;
};

// Chronological backtracking over cells in declaration order, values
// ascending, with interval-based forward checking. First returns at most one
// solution; All enumerates every solution once in search order; Optimize
// returns the first solution attaining the proven optimum.
SolveResult solve(const GroundModel& g, SolveMode mode, const SolveLimits& limits = {});

// Streaming enumeration in the same deterministic order; the callback
// returns false to stop early. The status out-parameter reports limit hits.
void solve_enumerate(const GroundModel& g, const SolveLimits& limits,
                     const std::function<bool(const Solution&)>& on_solution,
                     SolveStatus* status);

// Exact evaluation over complete assignments (the independent checker used
// in tests and the P3 loop).
std::int64_t eval_node(const GroundModel& g, int node, const std::vector<int>& values);
bool check_solution(const GroundModel& g, const std::vector<int>& values);

// Decodes the cells of the goal predicate's array into goal tuples matching
// the goal atom's pattern (constants filter, repeated variables must agree).
std::set<Tuple> extract_answer(const GroundModel& g, const Solution& s, const Atom& goal);

}  // namespace npdl
