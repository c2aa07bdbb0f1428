#pragma once

#include "npdl/ast.hpp"
#include "npdl/model.hpp"

namespace npdl {

// Range restriction: tuple-membership tests over forall-bound variables move
// into the binding list; domain self-membership tests collapse to 1.
ConstraintModel pass_range_restriction(const ConstraintModel& m, const Schema& schema);

// Constraint optimization: algebraic reductions ((c>0)>0, unit factors),
// removal of constraints with a tautological consequent, and pushing pure
// comparisons into binding guards.
ConstraintModel pass_constraint_simplify(const ConstraintModel& m);

// Arrays reduction: a boolean array from a generalized partition rule turns
// into an integer array over 0..|d| (1..|d| when the rule body holds only
// domain atoms; the existence constraint is dropped in that case). Updates
// the codebook with the integer coding when given.
ConstraintModel pass_array_reduction(const ConstraintModel& m, Codebook* codebook);

// Variable deletion: a binding variable used only to equate two integer
// array accesses is replaced by direct equality; unused bindings drop.
ConstraintModel pass_variable_deletion(const ConstraintModel& m);

struct OptimizeOptions {
  bool range_restriction = true;
  bool constraint_simplify = true;
  bool array_reduction = true;
  bool variable_deletion = true;

  static OptimizeOptions none() { return {false, false, false, false}; }
  static OptimizeOptions all() { return {}; }
};

// Fixed pipeline order: range restriction, constraint simplification, array
// reduction, variable deletion, and a final simplification sweep.
ConstraintModel optimize(const ConstraintModel& m, const Schema& schema,
                         const OptimizeOptions& opts, Codebook* codebook);

}  // namespace npdl
