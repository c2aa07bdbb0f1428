#pragma once

#include <set>
#include <string>
#include <vector>

#include "npdl/analysis.hpp"
#include "npdl/ast.hpp"
#include "npdl/diagnostics.hpp"
#include "npdl/model.hpp"

namespace npdl {

// Shared inputs of the per-rule translations: the schema (for signatures and
// domains) and the set of predicates that carry arrays (everything else is
// looked up in the data).
struct TranslationContext {
  const Schema* schema = nullptr;
  std::set<std::string> derived;  // predicates translated to array accesses
};

// Lowercases the leading character: source variables are uppercase, emitted
// binding names lowercase.
std::string model_var(const std::string& source_var);

// A conjunction with the listed existential variables becomes a sum over
// their domains of the product of its literal translations: derived atoms
// turn into array accesses, stored atoms into membership tests, negation
// into (1 - t), comparisons pass through.
MTerm translate_body(const TranslationContext& ctx, const Conjunction& conj,
                     const std::vector<std::string>& existentials,
                     const std::map<std::string, std::string>& var_domains);

// Generalized partition rules: an existence/uniqueness forall (body truth
// implies exactly one label) plus a support forall.
std::vector<MConstraint> translate_partition_rule(const TranslationContext& ctx, const Rule& r);

// Subset rules: membership implies body truth.
std::vector<MConstraint> translate_subset_rule(const TranslationContext& ctx, const Rule& r);

// Standard rules: a biconditional between the head cell and the sum of its
// translated disjuncts.
std::vector<MConstraint> translate_standard_rule(const TranslationContext& ctx, const Rule& r);

// Constraints: body truth implies some head atom (or false when none).
std::vector<MConstraint> translate_constraint(const TranslationContext& ctx, const Rule& r);

// Boolean decision arrays for P2-defined predicates, known-value integer
// arrays for other referenced IDB predicates.
std::vector<MDecl> build_declarations(const Program& p, const ComponentPartition& part,
                                      const Schema& schema, Diagnostics* diags = nullptr);

// No objective for plain goals; an optimization goal must name a P2-defined
// predicate over distinct variables and sums its array.
std::optional<MObjective> translate_goal(const Goal& goal, const Schema& schema,
                                         const std::set<std::string>& p2_defined,
                                         Diagnostics* diags);

struct TranspileResult {
  ConstraintModel model;
  Codebook codebook;
  Diagnostics diagnostics;

  bool ok() const { return !has_errors(diagnostics); }
};

// The whole query model: declarations, objective, then the P2 rules in
// group order (guess rules, standard rules, constraints; source order
// within each group).
TranspileResult assemble_model(const AnalyzedQuery& aq);

// Translates a bare constraint set against fully known predicates (used to
// check P3 constraints over a computed interpretation).
ConstraintModel constraints_only_model(const Program& p, const std::vector<int>& constraint_idx,
                                       const Schema& schema);

}  // namespace npdl
