#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "npdl/ast.hpp"

namespace npdl {

struct GroundAtom {
  std::string pred;
  Tuple args;
  auto operator<=>(const GroundAtom&) const = default;
};

// A finite set of ground atoms with a per-predicate index. Iteration order is
// lexicographic (predicate, then tuple).
class Interpretation {
 public:
  bool insert(const std::string& pred, Tuple args) {
    return rels_[pred].insert(std::move(args)).second;
  }
  bool contains(const std::string& pred, const Tuple& args) const {
    auto it = rels_.find(pred);
    return it != rels_.end() && it->second.count(args) > 0;
  }
  const std::set<Tuple>* relation(const std::string& pred) const {
    auto it = rels_.find(pred);
    return it == rels_.end() ? nullptr : &it->second;
  }
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [pred, rel] : rels_) n += rel.size();
    return n;
  }
  std::vector<GroundAtom> atoms() const {
    std::vector<GroundAtom> out;
    for (const auto& [pred, rel] : rels_)
      for (const auto& t : rel) out.push_back(GroundAtom{pred, t});
    return out;
  }
  void merge(const Interpretation& other) {
    for (const auto& [pred, rel] : other.rels_)
      for (const auto& t : rel) rels_[pred].insert(t);
  }
  const std::map<std::string, std::set<Tuple>>& relations() const { return rels_; }

  friend bool operator==(const Interpretation&, const Interpretation&) = default;
  friend bool operator<(const Interpretation& a, const Interpretation& b) {
    return a.rels_ < b.rels_;
  }

 private:
  std::map<std::string, std::set<Tuple>> rels_;
};

// Domain extents become unary atoms alongside the base facts, so rule bodies
// can mention domains and relations uniformly.
Interpretation base_interpretation(const Database& db);

using Bindings = std::map<std::string, Constant>;

struct MatchOptions {
  // Treat negated literals as always satisfiable (used to overapproximate
  // the reachable atom set when grounding).
  bool ignore_negatives = false;
};

// Enumerates every substitution satisfying the conjunction against `interp`,
// extending `seed`. Positive literals bind; equality comparisons bind a
// still-free side; other comparisons and negated literals test. Returns
// false if the callback stops the enumeration.
bool match_conjunction(const Conjunction& conj, const Interpretation& interp,
                       const Bindings& seed, const MatchOptions& opts,
                       const std::function<bool(const Bindings&)>& on_match);

// One naive-iteration step: all head instantiations whose body (some
// disjunct) holds in `current`. The rule must be a standard rule.
std::set<GroundAtom> derive_once(const Rule& rule, const Interpretation& current);

// Evaluates stratified standard rules to their unique stable model over
// `base`. Strata are computed internally; negation inside a cycle throws.
Interpretation evaluate_stratified(const std::vector<Rule>& rules, const Interpretation& base);

// True when every constraint holds in `interp`. A constraint is violated
// exactly when its body has a satisfying substitution under which no head
// atom is true. Works on parsed and normalized constraint forms alike.
bool satisfies_constraints(const std::vector<Rule>& constraints, const Interpretation& interp);

// Evaluates a ground comparison; throws on ordered comparison of symbols.
bool eval_comparison(const Comparison& cmp, const Bindings& env);

}  // namespace npdl
