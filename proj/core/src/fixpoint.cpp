#include "npdl/fixpoint.hpp"

#include <cassert>
#include <stdexcept>

#include "npdl/analysis.hpp"

namespace npdl {

Interpretation base_interpretation(const Database& db) {
  Interpretation m;
  for (const auto& [dom, ext] : db.extents)
    for (const auto& c : ext) m.insert(dom, {c});
  for (const auto& [pred, rel] : db.facts)
    for (const auto& t : rel.rows()) m.insert(pred, t);
  return m;
}

namespace {

std::optional<Constant> eval_expr(const Expr& e, const Bindings& env) {
  switch (e.kind) {
    case Expr::Kind::Int: return int_const(e.value);
    case Expr::Kind::Str: return str_const(e.var);
    case Expr::Kind::Var: {
      auto it = env.find(e.var);
      if (it == env.end()) return std::nullopt;
      return it->second;
    }
    default: {
      auto lhs = eval_expr(e.args[0], env);
      auto rhs = eval_expr(e.args[1], env);
      if (!lhs || !rhs) return std::nullopt;
      if (!std::holds_alternative<std::int64_t>(*lhs) ||
          !std::holds_alternative<std::int64_t>(*rhs))
        throw std::runtime_error("arithmetic over non-integer constants");
      std::int64_t a = std::get<std::int64_t>(*lhs);
      std::int64_t b = std::get<std::int64_t>(*rhs);
      switch (e.kind) {
        case Expr::Kind::Add: return int_const(a + b);
        case Expr::Kind::Sub: return int_const(a - b);
        default: return int_const(a * b);
      }
    }
  }
}

bool compare_constants(CompareOp op, const Constant& a, const Constant& b) {
  if (op == CompareOp::Eq) return a == b;
  if (op == CompareOp::Ne) return !(a == b);
  if (!std::holds_alternative<std::int64_t>(a) || !std::holds_alternative<std::int64_t>(b))
    throw std::runtime_error("ordered comparison over symbolic constants");
  std::int64_t x = std::get<std::int64_t>(a);
  std::int64_t y = std::get<std::int64_t>(b);
  switch (op) {
    case CompareOp::Lt: return x < y;
    case CompareOp::Le: return x <= y;
    case CompareOp::Gt: return x > y;
    case CompareOp::Ge: return x >= y;
    default: return false;
  }
}

// The single unbound variable of an expression, when the expression is just
// that variable (binding through arithmetic is out of scope).
const std::string* bindable_var(const Expr& e, const Bindings& env) {
  if (e.kind == Expr::Kind::Var && !env.count(e.var)) return &e.var;
  return nullptr;
}

class Matcher {
 public:
  Matcher(const Conjunction& conj, const Interpretation& interp, const MatchOptions& opts,
          const std::function<bool(const Bindings&)>& on_match)
      : interp_(interp), opts_(opts), on_match_(on_match) {
    for (const auto& lit : conj)
      (lit.kind == Literal::Kind::Atom ? positives_ : tests_).push_back(&lit);
  }

  bool run(Bindings env) { return match_positive(0, env); }

 private:
  bool match_positive(std::size_t i, Bindings& env) {
    if (i == positives_.size()) return run_tests(env);
    const Atom& a = positives_[i]->atom;
    const auto* rel = interp_.relation(a.pred);
    if (!rel) return true;  // empty relation: no matches, keep enumerating
    for (const auto& tuple : *rel) {
      if (tuple.size() != a.args.size()) continue;
      Bindings saved = env;
      bool ok = true;
      for (std::size_t k = 0; k < a.args.size() && ok; ++k) {
        const Term& t = a.args[k];
        if (t.is_var()) {
          auto it = env.find(t.var);
          if (it == env.end())
            env.emplace(t.var, tuple[k]);
          else
            ok = it->second == tuple[k];
        } else {
          ok = t.value == tuple[k];
        }
      }
      if (ok && !match_positive(i + 1, env)) return false;
      env = std::move(saved);
    }
    return true;
  }

  bool run_tests(Bindings& env) {
    // Tests evaluate once their variables are bound; equality comparisons
    // with one free side bind it. Loop until no test fires.
    std::vector<const Literal*> pending = tests_;
    Bindings local = env;
    bool progress = true;
    while (!pending.empty() && progress) {
      progress = false;
      std::vector<const Literal*> next;
      for (const Literal* lit : pending) {
        if (lit->kind == Literal::Kind::NegAtom) {
          if (opts_.ignore_negatives) {
            progress = true;
            continue;
          }
          Tuple t;
          bool ground = true;
          for (const auto& arg : lit->atom.args) {
            if (arg.is_var()) {
              auto it = local.find(arg.var);
              if (it == local.end()) {
                ground = false;
                break;
              }
              t.push_back(it->second);
            } else {
              t.push_back(arg.value);
            }
          }
          if (!ground) {
            next.push_back(lit);
            continue;
          }
          if (interp_.contains(lit->atom.pred, t)) return true;  // test failed, no match
          progress = true;
          continue;
        }
        const Comparison& cmp = lit->cmp;
        auto lhs = eval_expr(cmp.lhs, local);
        auto rhs = eval_expr(cmp.rhs, local);
        if (lhs && rhs) {
          if (!compare_constants(cmp.op, *lhs, *rhs)) return true;
          progress = true;
          continue;
        }
        if (cmp.op == CompareOp::Eq) {
          if (const std::string* v = bindable_var(cmp.lhs, local); v && rhs) {
            local.emplace(*v, *rhs);
            progress = true;
            continue;
          }
          if (const std::string* v = bindable_var(cmp.rhs, local); v && lhs) {
            local.emplace(*v, *lhs);
            progress = true;
            continue;
          }
        }
        next.push_back(lit);
      }
      pending = std::move(next);
    }
    if (!pending.empty())
      throw std::runtime_error("unbound variable in comparison or negated literal");
    return on_match_(local);
  }

  const Interpretation& interp_;
  const MatchOptions& opts_;
  const std::function<bool(const Bindings&)>& on_match_;
  std::vector<const Literal*> positives_;
  std::vector<const Literal*> tests_;
};

}  // namespace

bool eval_comparison(const Comparison& cmp, const Bindings& env) {
  auto lhs = eval_expr(cmp.lhs, env);
  auto rhs = eval_expr(cmp.rhs, env);
  if (!lhs || !rhs) throw std::runtime_error("unbound variable in comparison");
  return compare_constants(cmp.op, *lhs, *rhs);
}

bool match_conjunction(const Conjunction& conj, const Interpretation& interp,
                       const Bindings& seed, const MatchOptions& opts,
                       const std::function<bool(const Bindings&)>& on_match) {
  Matcher m(conj, interp, opts, on_match);
  return m.run(seed);
}

std::set<GroundAtom> derive_once(const Rule& rule, const Interpretation& current) {
  assert(rule.kind == RuleKind::Standard);
  std::set<GroundAtom> out;
  const Atom& head = rule.head.front();
  for (const auto& conj : rule.body) {
    match_conjunction(conj, current, {}, {}, [&](const Bindings& env) {
      Tuple t;
      for (const auto& arg : head.args) {
        if (arg.is_var()) {
          auto it = env.find(arg.var);
          if (it == env.end()) throw std::runtime_error("unbound head variable '" + arg.var + "'");
          t.push_back(it->second);
        } else {
          t.push_back(arg.value);
        }
      }
      out.insert(GroundAtom{head.pred, std::move(t)});
      return true;
    });
  }
  return out;
}

Interpretation evaluate_stratified(const std::vector<Rule>& rules, const Interpretation& base) {
  StratifyResult strat = stratify_rules(rules);
  if (!strat.diagnostics.empty())
    throw std::logic_error("evaluate_stratified on an unstratifiable rule set: " +
                           strat.diagnostics.front().message);
  Interpretation current = base;
  for (const auto& stratum : strat.strata) {
    for (;;) {
      bool added = false;
      for (int ri : stratum)
        for (const auto& atom : derive_once(rules[ri], current))
          added |= current.insert(atom.pred, atom.args);
      if (!added) break;
    }
  }
  return current;
}

bool satisfies_constraints(const std::vector<Rule>& constraints, const Interpretation& interp) {
  for (const auto& r : constraints) {
    if (r.kind != RuleKind::Constraint) continue;
    for (const auto& conj : r.body) {
      // Violated iff body ∧ ¬head1 ∧ ... ∧ ¬headm has a match.
      Conjunction probe = conj;
      for (const auto& h : r.head) probe.push_back(Literal::negative(h));
      bool violated = false;
      match_conjunction(probe, interp, {}, {}, [&](const Bindings&) {
        violated = true;
        return false;
      });
      if (violated) return false;
    }
  }
  return true;
}

}  // namespace npdl
