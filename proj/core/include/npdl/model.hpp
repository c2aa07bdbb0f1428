#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "npdl/ast.hpp"

namespace npdl {

// ---------------------------------------------------------------------------
// Quantifier bindings
// ---------------------------------------------------------------------------

struct MBinding {
  enum class Kind {
    Domain,    // x in node
    Tuple,     // <x,y> in edge; binds free pattern variables, tests bound ones
    IntRange,  // c in intcolor; integer codes lo..|source_domain|
  };
  Kind kind = Kind::Domain;
  std::vector<std::string> vars;  // one entry except for Tuple patterns
  std::string domain;             // Domain: domain; Tuple: relation; IntRange: source domain
  std::string range;              // IntRange: printed range name
  int lo = 0;                     // IntRange lower bound (0 or 1)

  static MBinding over_domain(std::string var, std::string dom) {
    MBinding b;
    b.kind = Kind::Domain;
    b.vars.push_back(std::move(var));
    b.domain = std::move(dom);
    return b;
  }
  static MBinding over_tuple(std::vector<std::string> vars, std::string rel) {
    MBinding b;
    b.kind = Kind::Tuple;
    b.vars = std::move(vars);
    b.domain = std::move(rel);
    return b;
  }
  static MBinding over_range(std::string var, std::string source_domain, std::string range,
                             int lo) {
    MBinding b;
    b.kind = Kind::IntRange;
    b.vars.push_back(std::move(var));
    b.domain = std::move(source_domain);
    b.range = std::move(range);
    b.lo = lo;
    return b;
  }

  friend bool operator==(const MBinding&, const MBinding&) = default;
};

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

// Arithmetic/boolean expression tree. Comparisons evaluate to 0/1; truth of a
// constraint side means "evaluates nonzero".
struct MTerm {
  enum class Kind {
    IntLit,       // value
    StrLit,       // symbolic constant (only inside comparisons)
    False,        // the `false` consequent
    VarRef,       // bound variable
    Decode,       // args[0] is an integer code of `text`'s domain; evaluates
                  // to the coded constant (identity for 1..N integer extents)
    Encode,       // args[0] is a constant of domain `text`; evaluates to its code
    ArrayAccess,  // text = array, args = indices
    Sum,          // sum(bindings : guard) args[0]
    Mul, Add,     // n-ary products / sums of args
    Sub,          // args[0] - args[1]
    Compare,      // args[0] op args[1]
  };
  Kind kind = Kind::IntLit;
  std::int64_t value = 0;
  std::string text;
  CompareOp op = CompareOp::Eq;
  std::vector<MTerm> args;
  std::vector<MBinding> bindings;  // Sum only
  std::vector<MTerm> guard;        // Sum only; conjunction of comparisons

  static MTerm lit(std::int64_t v) {
    MTerm t;
    t.value = v;
    return t;
  }
  static MTerm str(std::string s) {
    MTerm t;
    t.kind = Kind::StrLit;
    t.text = std::move(s);
    return t;
  }
  static MTerm var(std::string name) {
    MTerm t;
    t.kind = Kind::VarRef;
    t.text = std::move(name);
    return t;
  }
  static MTerm access(std::string array, std::vector<MTerm> indices) {
    MTerm t;
    t.kind = Kind::ArrayAccess;
    t.text = std::move(array);
    t.args = std::move(indices);
    return t;
  }
  static MTerm sum(std::vector<MBinding> bindings, MTerm body) {
    MTerm t;
    t.kind = Kind::Sum;
    t.bindings = std::move(bindings);
    t.args.push_back(std::move(body));
    return t;
  }
  static MTerm mul(std::vector<MTerm> factors) {
    MTerm t;
    t.kind = Kind::Mul;
    t.args = std::move(factors);
    return t;
  }
  static MTerm add(std::vector<MTerm> terms) {
    MTerm t;
    t.kind = Kind::Add;
    t.args = std::move(terms);
    return t;
  }
  static MTerm sub(MTerm a, MTerm b) {
    MTerm t;
    t.kind = Kind::Sub;
    t.args.push_back(std::move(a));
    t.args.push_back(std::move(b));
    return t;
  }
  static MTerm compare(CompareOp op, MTerm l, MTerm r) {
    MTerm t;
    t.kind = Kind::Compare;
    t.op = op;
    t.args.push_back(std::move(l));
    t.args.push_back(std::move(r));
    return t;
  }
  static MTerm false_lit() {
    MTerm t;
    t.kind = Kind::False;
    return t;
  }
  static MTerm decode(std::string domain, MTerm code) {
    MTerm t;
    t.kind = Kind::Decode;
    t.text = std::move(domain);
    t.args.push_back(std::move(code));
    return t;
  }
  static MTerm encode(std::string domain, MTerm constant) {
    MTerm t;
    t.kind = Kind::Encode;
    t.text = std::move(domain);
    t.args.push_back(std::move(constant));
    return t;
  }

  bool is_lit(std::int64_t v) const { return kind == Kind::IntLit && value == v; }

  friend bool operator==(const MTerm&, const MTerm&) = default;
};

// ---------------------------------------------------------------------------
// Declarations, constraints, objective
// ---------------------------------------------------------------------------

struct MDecl {
  enum class Kind {
    BoolArray,   // dvar boolean name[dims];
    IntArray,    // dvar int name[dims] in range;
    KnownArray,  // int name[dims];  values fixed before solving
    CardConst,   // int name = card(domain);
    RangeDef,    // range name = lo..card_const;
  };
  Kind kind = Kind::BoolArray;
  std::string name;
  std::vector<std::string> dims;  // domain or range names; empty = scalar
  std::string range;              // IntArray
  std::string domain;             // CardConst
  std::string card;               // RangeDef upper bound (a CardConst name)
  int lo = 0;                     // RangeDef lower bound

  // Provenance for the array-reduction pass.
  bool from_partition = false;
  std::string label_domain;
  bool body_domain_only = false;

  friend bool operator==(const MDecl&, const MDecl&) = default;
};

struct MConstraint {
  enum class Kind { Implies, Iff };
  Kind kind = Kind::Implies;
  std::vector<MBinding> bindings;
  std::vector<MTerm> guard;  // conjunction attached after the bindings
  MTerm lhs;
  MTerm rhs;  // ignored when rhs_false
  bool rhs_false = false;

  enum class Origin { General, PartitionExistence, PartitionSupport, SubsetSupport, StandardDef,
                      UserConstraint };
  Origin origin = Origin::General;
  std::string origin_array;

  friend bool operator==(const MConstraint&, const MConstraint&) = default;
};

struct MObjective {
  bool maximize = false;
  std::vector<MBinding> bindings;
  std::vector<MTerm> guard;
  MTerm body;

  friend bool operator==(const MObjective&, const MObjective&) = default;
};

struct ConstraintModel {
  std::vector<MDecl> decls;
  std::optional<MObjective> objective;
  std::vector<MConstraint> constraints;

  const MDecl* decl(const std::string& name) const {
    for (const auto& d : decls)
      if (d.name == name) return &d;
    return nullptr;
  }

  friend bool operator==(const ConstraintModel&, const ConstraintModel&) = default;
};

// Records how optimized arrays map back to the boolean originals: which
// arrays were reduced (their cell value is an integer code of the label
// domain) and which index dimensions now carry integer codes.
struct Codebook {
  struct ArrayInfo {
    std::vector<std::string> dims;    // original index domains
    bool reduced = false;             // value is a label code (0 = none)
    std::string label_domain;        // source domain of the coded value
    std::vector<bool> dim_is_code;    // dimension carries codes of dims[i]
  };
  std::map<std::string, ArrayInfo> arrays;
  // Domains whose bindings were rewritten to integer ranges, with the range
  // lower bound (0 or 1).
  std::map<std::string, int> coded_domains;
};

}  // namespace npdl
