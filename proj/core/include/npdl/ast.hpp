#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace npdl {

// A constant is either an integer or a (lowercase) symbol. Integers order
// before symbols so that mixed extents print deterministically.
using Constant = std::variant<std::int64_t, std::string>;

std::string to_string(const Constant& c);

inline Constant int_const(std::int64_t v) { return Constant{v}; }
inline Constant str_const(std::string s) { return Constant{std::move(s)}; }

// ---------------------------------------------------------------------------
// Terms, expressions, literals
// ---------------------------------------------------------------------------

struct Term {
  enum class Kind { Var, Const };
  Kind kind = Kind::Var;
  std::string var;   // Kind::Var
  Constant value;    // Kind::Const

  static Term variable(std::string name) {
    Term t;
    t.kind = Kind::Var;
    t.var = std::move(name);
    return t;
  }
  static Term constant(Constant c) {
    Term t;
    t.kind = Kind::Const;
    t.value = std::move(c);
    return t;
  }
  bool is_var() const { return kind == Kind::Var; }

  friend bool operator==(const Term&, const Term&) = default;
};

// Arithmetic expression over variables and constants with +, -, *.
// Strings are allowed as leaves so equality comparisons against symbolic
// constants work; arithmetic nodes require integer operands at evaluation.
struct Expr {
  enum class Kind { Var, Int, Str, Add, Sub, Mul };
  Kind kind = Kind::Int;
  std::string var;          // Var name or Str text
  std::int64_t value = 0;   // Int
  std::vector<Expr> args;   // binary for Add/Sub/Mul

  static Expr variable(std::string name) {
    Expr e;
    e.kind = Kind::Var;
    e.var = std::move(name);
    return e;
  }
  static Expr integer(std::int64_t v) {
    Expr e;
    e.kind = Kind::Int;
    e.value = v;
    return e;
  }
  static Expr symbol(std::string s) {
    Expr e;
    e.kind = Kind::Str;
    e.var = std::move(s);
    return e;
  }
  static Expr binary(Kind k, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = k;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
  }

  friend bool operator==(const Expr&, const Expr&) = default;
};

// Collects variable names of an expression into `out` (in occurrence order).
void collect_vars(const Expr& e, std::vector<std::string>& out);

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

const char* to_token(CompareOp op);

struct Atom {
  std::string pred;
  std::vector<Term> args;

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Comparison {
  Expr lhs;
  CompareOp op = CompareOp::Eq;
  Expr rhs;

  friend bool operator==(const Comparison&, const Comparison&) = default;
};

struct Literal {
  enum class Kind { Atom, NegAtom, Compare };
  Kind kind = Kind::Atom;
  Atom atom;        // Atom / NegAtom
  Comparison cmp;   // Compare

  static Literal positive(Atom a) {
    Literal l;
    l.kind = Kind::Atom;
    l.atom = std::move(a);
    return l;
  }
  static Literal negative(Atom a) {
    Literal l;
    l.kind = Kind::NegAtom;
    l.atom = std::move(a);
    return l;
  }
  static Literal compare(Comparison c) {
    Literal l;
    l.kind = Kind::Compare;
    l.cmp = std::move(c);
    return l;
  }

  friend bool operator==(const Literal&, const Literal&) = default;
};

using Conjunction = std::vector<Literal>;

// ---------------------------------------------------------------------------
// Rules, programs, queries
// ---------------------------------------------------------------------------

enum class RuleKind { Standard, Partition, GeneralizedPartition, Subset, Constraint };

struct Rule {
  RuleKind kind = RuleKind::Standard;
  // Standard/Subset: one head atom. Partition: two or more. Constraint: none
  // as parsed; normalization may move negated body atoms into the head.
  // GeneralizedPartition: one head atom whose last argument is `label_var`.
  std::vector<Atom> head;
  std::string label_var;
  // Disjunction of conjunctions. Parsed rules have a single conjunct except
  // where the `;` separator was used; merged standard rules carry several.
  std::vector<Conjunction> body;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct Goal {
  enum class Mode { Plain, Min, Max };
  Mode mode = Mode::Plain;
  Atom atom;

  friend bool operator==(const Goal&, const Goal&) = default;
};

struct Program {
  std::vector<Rule> rules;
  std::optional<Goal> goal;

  friend bool operator==(const Program&, const Program&) = default;
};

struct Query {
  Program program;
  Goal goal;
};

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

// A derived domain is introduced during schema inference or normalization:
// the union/intersection of named domains, or an explicit enumeration used
// as the label set of a rewritten partition rule.
struct DerivedDomain {
  enum class Kind { Union, Intersection, Enumeration };
  Kind kind = Kind::Union;
  std::vector<std::string> parts;     // Union/Intersection
  std::vector<Constant> constants;    // Enumeration

  friend bool operator==(const DerivedDomain&, const DerivedDomain&) = default;
};

struct Schema {
  std::set<std::string> string_domains;
  std::set<std::string> int_domains;
  std::optional<std::pair<std::int64_t, std::int64_t>> int_range;
  std::map<std::string, std::vector<std::string>> predicates;
  std::map<std::string, DerivedDomain> derived_domains;
  // Predicates whose signatures were inferred from rules; they carry no
  // database facts.
  std::set<std::string> idb_predicates;

  bool is_domain(const std::string& name) const {
    return string_domains.count(name) || int_domains.count(name) ||
           derived_domains.count(name) || (name == "integer" && int_range.has_value());
  }
  bool is_int_domain(const std::string& name) const;

  friend bool operator==(const Schema&, const Schema&) = default;
};

// Reserved infix for oracle-generated predicate symbols.
inline constexpr const char* kFreshMarker = "__st";

// ---------------------------------------------------------------------------
// Database
// ---------------------------------------------------------------------------

using Tuple = std::vector<Constant>;

// A base relation. Insertion order is preserved (it drives extent numbering
// and OPL data emission); membership checks go through a side index.
class Relation {
 public:
  bool insert(Tuple t) {
    auto [it, fresh] = index_.insert(std::move(t));
    if (fresh) rows_.push_back(*it);
    return fresh;
  }
  bool contains(const Tuple& t) const { return index_.count(t) > 0; }
  const std::vector<Tuple>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  friend bool operator==(const Relation& a, const Relation& b) { return a.rows_ == b.rows_; }

 private:
  std::vector<Tuple> rows_;
  std::set<Tuple> index_;
};

struct Database {
  // Domain name -> extent, in first-appearance order (integer ranges ascend).
  std::map<std::string, std::vector<Constant>> extents;
  std::map<std::string, Relation> facts;

  const std::vector<Constant>* extent(const std::string& domain) const {
    auto it = extents.find(domain);
    return it == extents.end() ? nullptr : &it->second;
  }
  // 1-based position of `c` in the extent of `domain`, 0 if absent.
  int code_of(const std::string& domain, const Constant& c) const;
};

// Materializes derived domains (union/intersection/enumeration) and, when an
// integer range is declared, the consecutive `integer` extent.
void materialize_domains(const Schema& schema, Database& db);

}  // namespace npdl
