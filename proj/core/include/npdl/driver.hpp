#pragma once

#include <optional>
#include <string>
#include <vector>

#include "npdl/analysis.hpp"
#include "npdl/ast.hpp"
#include "npdl/diagnostics.hpp"
#include "npdl/optimizer.hpp"
#include "npdl/oracle.hpp"
#include "npdl/solver.hpp"

namespace npdl {

struct RunOptions {
  SolveMode mode = SolveMode::First;
  OptimizeOptions opt = OptimizeOptions::all();
  SolveLimits limits;
  long long candidate_cap = -1;  // max rejected P2 candidates in step 3; -1 = exhaustive
};

struct RunStats {
  std::size_t m1_size = 0;  // atoms derived by step 1
  std::size_t m2_size = 0;  // atoms of the accepted P2 solution
  std::size_t m3_size = 0;  // atoms derived by step 3
  int solve_calls = 0;      // solver invocations
  int p3_iterations = 0;    // P2 candidates rejected by the P3 check
};

struct Answer {
  enum class Kind { Solved, NoSolution, ResourceLimit };
  Kind kind = Kind::NoSolution;
  // Goal relations: one for First/Optimize, all distinct ones for All, in
  // deterministic (sorted) order.
  std::vector<GoalRelation> answers;
  std::optional<std::int64_t> objective;
  RunStats stats;
};

struct RunResult {
  Diagnostics diagnostics;
  std::optional<Answer> answer;  // absent when diagnostics carry errors

  bool ok() const { return answer.has_value(); }
};

// The four evaluation steps: P1 fixpoint, P2 solve, the step-2<->3 iteration
// against the recursive check layer, and the P4 epilogue.
RunResult run_query(const AnalyzedQuery& aq, const Database& db, const RunOptions& opts = {});

struct LoadedQuery {
  AnalyzedQuery aq;
  Database db;
};

// Parses and analyzes the three inputs; derived domains materialize on the
// returned database. Parse failures throw; analysis problems land in
// aq.diagnostics.
LoadedQuery load_query(const std::string& schema_text, const std::string& program_text,
                       const std::string& facts_text);

// Deterministic benchmark-style instances: chain, cycle, complete,
// grid-ladder (each: one size parameter), random-gnp (size, probability,
// seed). Undirected families store symmetric edge pairs.
Database gen_instance(const std::string& family, const std::vector<std::string>& params);

// The gen instance as `.npf` fact text (byte-deterministic).
std::string instance_facts(const Database& db);

}  // namespace npdl
