#pragma once

#include <optional>
#include <set>
#include <vector>

#include "npdl/ast.hpp"
#include "npdl/fixpoint.hpp"

namespace npdl {

// Rewrites partition, subset, and constraint rules into standard rules with
// (possibly unstratified) negation. Fresh predicates carry the reserved
// __st<k> suffix; standard rules copy through unchanged.
std::vector<Rule> st_transform(const Program& p);

struct OracleOptions {
  // Maximum number of candidate atoms enumerated by the reduct checker.
  std::size_t atom_bound = 24;
  // Maximum number of guess combinations for the direct enumeration.
  std::size_t candidate_bound = 20'000'000;
};

struct StableModels {
  bool bound_exceeded = false;
  std::size_t enumerated_atoms = 0;
  std::vector<Interpretation> models;  // deterministic order
};

// Brute-force stable models of a DATALOG-with-negation rule set: candidate
// truth values are enumerated only for a feedback set of the unstratifiable
// predicates, the rest is derived, and every candidate is verified against
// the Gelfond-Lifschitz reduct.
StableModels enumerate_stable_models(const std::vector<Rule>& rules, const Database& db,
                                     const OracleOptions& opts = {});

using GoalRelation = std::set<Tuple>;

struct OracleAnswer {
  bool bound_exceeded = false;
  std::set<GoalRelation> answers;  // goal projections of the stable models
  std::optional<std::size_t> optimal_cardinality;
};

// Reference answers per the stable-model semantics: st-transform, enumerate,
// project onto the goal, and filter to optimal cardinality for min/max.
OracleAnswer oracle_answer(const Program& p, const Database& db, const OracleOptions& opts = {});

// Independent second route: enumerate guess extents directly (subsets and
// label assignments), evaluate the stratified remainder, check constraints.
// Never consults st_transform or the reduct machinery.
OracleAnswer oracle_answer_direct(const Program& p, const Database& db,
                                  const OracleOptions& opts = {});

// All stable models as interpretations via the direct route (test support).
StableModels direct_stable_models(const Program& p, const Database& db,
                                  const OracleOptions& opts = {});

}  // namespace npdl
