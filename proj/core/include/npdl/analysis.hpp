#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "npdl/ast.hpp"
#include "npdl/diagnostics.hpp"

namespace npdl {

// ---------------------------------------------------------------------------
// Dependency graph
// ---------------------------------------------------------------------------

struct DependencyGraph {
  std::set<std::string> nodes;
  // q -> heads defined by rules whose body mentions q, split by polarity.
  std::map<std::string, std::set<std::string>> positive_edges;
  std::map<std::string, std::set<std::string>> negative_edges;
  // head -> body predicates of its defining rules (either polarity).
  std::map<std::string, std::set<std::string>> uses;
};

DependencyGraph build_dependency_graph(const Program& p);

// Predicates that `seed` transitively depends on (excluding `seed` unless it
// lies on a cycle through itself).
std::set<std::string> dependencies_of(const DependencyGraph& g, const std::string& seed);

// ---------------------------------------------------------------------------
// Safety and stratification
// ---------------------------------------------------------------------------

// A rule is safe when every head, negated-literal, and comparison variable
// occurs in a positive predicate literal of the same conjunct. Comparison
// atoms never bind.
Diagnostics check_safety(const Program& p);

struct StratifyResult {
  // Indices into the given rule vector, grouped by stratum, bottom first.
  std::vector<std::vector<int>> strata;
  Diagnostics diagnostics;
};

// Stratifies a set of standard rules (guess and constraint rules in `p` are
// ignored). Negation inside a dependency cycle is reported as an error that
// names the cycle.
StratifyResult stratify(const Program& p);
StratifyResult stratify_rules(const std::vector<Rule>& rules);

// ---------------------------------------------------------------------------
// Schema inference
// ---------------------------------------------------------------------------

// Deterministic names for derived domains introduced by inference and
// normalization.
std::string union_domain_name(const std::vector<std::string>& parts);
std::string intersection_domain_name(const std::vector<std::string>& parts);
std::string partition_label_domain_name(const std::string& pred);

// Deduces a signature for every IDB predicate, registering fresh union /
// intersection / enumeration domains on the returned schema. Warnings are
// appended for statically empty intersections.
Schema infer_schemas(const Program& p, const Schema& base, Diagnostics* diags = nullptr);

// Per-conjunct variable domains (after inference every variable resolves to
// exactly one domain; multi-domain variables resolve to their registered
// intersection domain).
std::map<std::string, std::string> conjunct_var_domains(const Conjunction& c,
                                                        const Schema& schema);

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

// Rewrites the program into the canonical shape the translation expects:
//  (a) one extended rule per standard predicate (bodies joined by ';'),
//  (b) partition rules turned into generalized-partition or subset form,
//  (c) no variable constrained by two different domains in one conjunct,
//  (d) constants only in comparison atoms,
//  (e) constraints in disjunctive-head form with a positive body.
// New label domains and auxiliary predicate signatures are registered on
// `schema`.
Program normalize(const Program& p, Schema& schema);

// ---------------------------------------------------------------------------
// Classification and component partition
// ---------------------------------------------------------------------------

struct Classification {
  std::set<std::string> guess;
  std::set<std::string> standard;
  Diagnostics diagnostics;
};

Classification classify_predicates(const Program& p);

struct ConstrainedMarking {
  std::set<std::string> constrained;
  std::set<std::string> recursion_dependent;
  std::set<std::string> depends_on_guess;
};

ConstrainedMarking mark_constrained(const Program& p, const Classification& cls);

struct ComponentPartition {
  std::vector<int> p1;    // standard rules not depending on guesses
  std::vector<int> p2_g;  // guess rules
  std::vector<int> p2_s;  // constrained, not recursion-dependent
  std::vector<int> p2_c;  // constraints over P_G + P1_S + P2_S + base
  std::vector<int> p3_s;  // constrained, recursion-dependent
  std::vector<int> p3_c;  // constraints mentioning P3_S predicates
  std::vector<int> p4;    // guess-dependent but unconstrained

  std::size_t total() const {
    return p1.size() + p2_g.size() + p2_s.size() + p2_c.size() + p3_s.size() + p3_c.size() +
           p4.size();
  }
};

ComponentPartition partition_components(const Program& p, const Classification& cls,
                                        const ConstrainedMarking& marking);

// ---------------------------------------------------------------------------
// One-shot analysis
// ---------------------------------------------------------------------------

struct AnalyzedQuery {
  Program program;  // normalized
  Schema schema;    // with inferred signatures and derived domains
  Classification classes;
  ConstrainedMarking marking;
  ComponentPartition partition;
  std::vector<std::vector<int>> strata;  // strata of normalized standard rules
  Diagnostics diagnostics;

  bool ok() const { return !has_errors(diagnostics); }
};

AnalyzedQuery analyze(const Program& p, const Schema& schema);

}  // namespace npdl
