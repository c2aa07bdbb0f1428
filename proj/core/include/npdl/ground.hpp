#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "npdl/ast.hpp"
#include "npdl/fixpoint.hpp"
#include "npdl/model.hpp"

namespace npdl {

// A fully instantiated model: decision cells in declaration order, ground
// constraints over an expression arena, and an optional objective as a list
// of 0/1-valued ground terms.
struct GroundModel {
  struct Layout {
    std::string name;
    bool is_bool = true;
    int lo = 0, hi = 1;  // int cell value range (inclusive)
    int cell_base = 0;
    // Per dimension: display constant for each offset, and whether the
    // offset decodes to a real domain constant (the 0 code does not).
    std::vector<std::vector<Constant>> dim_display;
    std::vector<std::vector<bool>> dim_valid;
    // Reduced arrays: value code k decodes to value_decode[k-1].
    std::vector<Constant> value_decode;

    std::size_t cell_count() const {
      std::size_t n = 1;
      for (const auto& d : dim_display) n *= d.size();
      return n;
    }
  };

  struct Node {
    enum class Kind { Lit, Cell, Mul, Add, Sub, Compare };
    Kind kind = Kind::Lit;
    std::int64_t value = 0;  // Lit
    int cell = -1;           // Cell
    CompareOp op = CompareOp::Eq;
    std::vector<int> kids;
  };

  struct Constraint {
    bool iff = false;
    int lhs = -1;
    int rhs = -1;  // -1 encodes the `false` consequent
  };

  std::vector<Layout> layouts;
  int total_cells = 0;
  std::vector<Node> nodes;
  std::vector<Constraint> constraints;
  int unsat_markers = 0;  // ground constraints already known violated

  bool has_objective = false;
  bool maximize = false;
  std::vector<int> objective_nodes;

  // Cell ids are dense: layout.cell_base plus the row-major index offset.
  int cell_of(int layout, const std::vector<int>& offsets) const;
  bool cell_is_bool(int cell) const;
  int cell_lo(int cell) const;
  int cell_hi(int cell) const;
  const Layout& layout_of_cell(int cell) const;

  std::size_t assignment_space() const;  // product of cell value counts
};

// Expands every forall and sum over the database extents, folding constant
// subterms. Known-value arrays read their cells from `known`; trivially true
// ground constraints are dropped and trivially false ones are counted as
// unsatisfiable markers. Throws on undeclared domains or empty ranges.
GroundModel ground(const ConstraintModel& m, const Database& db, const Interpretation& known);

}  // namespace npdl
