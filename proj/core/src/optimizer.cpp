#include "npdl/optimizer.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace npdl {

namespace {

bool is_membership_test(const MTerm& t) {
  return t.kind == MTerm::Kind::Compare && t.op == CompareOp::Gt &&
         t.args[0].kind == MTerm::Kind::Sum && t.args[0].args[0].is_lit(1) &&
         t.args[0].bindings.size() == 1 && t.args[0].guard.empty() && t.args[1].is_lit(0);
}

// Variables bound by a quantifier scope: name -> domain/range name.
using Scope = std::map<std::string, const MBinding*>;

void extend_scope(Scope& scope, const std::vector<MBinding>& bindings) {
  for (const auto& b : bindings)
    for (const auto& v : b.vars) scope[v] = &b;
}

template <class F>
void walk_constraint_terms(MConstraint& c, F&& f) {
  f(c.lhs);
  if (!c.rhs_false) f(c.rhs);
  for (auto& g : c.guard) f(g);
}

// ---------------------------------------------------------------------------
// Range restriction
// ---------------------------------------------------------------------------

// Replaces domain self-membership tests (sum(x in D) 1 > 0) with 1 whenever
// x is bound over the same D in an enclosing scope.
void drop_self_memberships(MTerm& t, Scope scope) {
  if (t.kind == MTerm::Kind::Sum) extend_scope(scope, t.bindings);
  for (auto& a : t.args) drop_self_memberships(a, scope);
  for (auto& g : t.guard) drop_self_memberships(g, scope);
  if (!is_membership_test(t)) return;
  const MBinding& b = t.args[0].bindings.front();
  if (b.kind != MBinding::Kind::Domain) return;
  auto it = scope.find(b.vars.front());
  if (it == scope.end()) return;
  const MBinding& outer = *it->second;
  if (outer.kind == MBinding::Kind::Domain && outer.domain == b.domain) t = MTerm::lit(1);
}

struct TupleRewrite {
  std::vector<std::string> vars;
  std::string relation;
};

// Finds a tuple-membership factor of `lhs` whose pattern variables are all
// distinct forall-bound domain variables matching the relation's signature;
// removes it and reports the rewrite.
bool extract_tuple_membership(MTerm& lhs, const std::vector<MBinding>& bindings,
                              const Schema& schema, TupleRewrite* out) {
  if (lhs.kind != MTerm::Kind::Compare) return false;
  MTerm& inner = lhs.args[0];

  auto qualifies = [&](const MTerm& cand) -> bool {
    if (!is_membership_test(cand)) return false;
    const MBinding& b = cand.args[0].bindings.front();
    if (b.kind != MBinding::Kind::Tuple) return false;
    auto sig = schema.predicates.find(b.domain);
    if (sig == schema.predicates.end() || sig->second.size() != b.vars.size()) return false;
    std::set<std::string> distinct(b.vars.begin(), b.vars.end());
    if (distinct.size() != b.vars.size()) return false;
    for (std::size_t i = 0; i < b.vars.size(); ++i) {
      bool ok = false;
      for (const auto& fb : bindings)
        ok = ok || (fb.kind == MBinding::Kind::Domain && fb.vars.front() == b.vars[i] &&
                    fb.domain == sig->second[i]);
      if (!ok) return false;
    }
    return true;
  };

  if (qualifies(inner)) {
    const MBinding& b = inner.args[0].bindings.front();
    out->vars = b.vars;
    out->relation = b.domain;
    inner = MTerm::lit(1);
    return true;
  }
  if (inner.kind == MTerm::Kind::Mul) {
    for (std::size_t i = 0; i < inner.args.size(); ++i) {
      if (!qualifies(inner.args[i])) continue;
      const MBinding& b = inner.args[i].args[0].bindings.front();
      out->vars = b.vars;
      out->relation = b.domain;
      inner.args.erase(inner.args.begin() + static_cast<std::ptrdiff_t>(i));
      if (inner.args.size() == 1) inner = MTerm(inner.args.front());
      return true;
    }
  }
  return false;
}

}  // namespace

ConstraintModel pass_range_restriction(const ConstraintModel& m, const Schema& schema) {
  ConstraintModel out = m;
  for (auto& c : out.constraints) {
    TupleRewrite tr;
    if (extract_tuple_membership(c.lhs, c.bindings, schema, &tr)) {
      std::vector<MBinding> rebuilt;
      bool placed = false;
      for (const auto& b : c.bindings) {
        bool dropped = b.kind == MBinding::Kind::Domain &&
                       std::find(tr.vars.begin(), tr.vars.end(), b.vars.front()) != tr.vars.end();
        if (!dropped) {
          rebuilt.push_back(b);
          continue;
        }
        if (!placed) {
          rebuilt.push_back(MBinding::over_tuple(tr.vars, tr.relation));
          placed = true;
        }
      }
      c.bindings = std::move(rebuilt);
    }
    Scope scope;
    extend_scope(scope, c.bindings);
    walk_constraint_terms(c, [&](MTerm& t) { drop_self_memberships(t, scope); });
  }
  if (out.objective) {
    Scope scope;
    extend_scope(scope, out.objective->bindings);
    drop_self_memberships(out.objective->body, scope);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Constraint simplification
// ---------------------------------------------------------------------------

namespace {

bool simplify_term(MTerm& t) {
  bool changed = false;
  for (auto& a : t.args) changed |= simplify_term(a);
  for (auto& g : t.guard) changed |= simplify_term(g);

  if (t.kind == MTerm::Kind::Mul) {
    std::size_t before = t.args.size();
    t.args.erase(std::remove_if(t.args.begin(), t.args.end(),
                                [](const MTerm& f) { return f.is_lit(1); }),
                 t.args.end());
    if (t.args.size() != before) changed = true;
    if (t.args.empty()) {
      t = MTerm::lit(1);
      return true;
    }
    if (t.args.size() == 1) {
      t = MTerm(t.args.front());
      return true;
    }
    return changed;
  }
  // ((c > 0) > 0) collapses to (c > 0).
  if (t.kind == MTerm::Kind::Compare && t.op == CompareOp::Gt && t.args[1].is_lit(0) &&
      t.args[0].kind == MTerm::Kind::Compare && t.args[0].op == CompareOp::Gt &&
      t.args[0].args[1].is_lit(0)) {
    t = MTerm(t.args[0]);
    return true;
  }
  return changed;
}

bool is_tautology(const MTerm& t) {
  if (t.is_lit(1)) return true;
  return t.kind == MTerm::Kind::Compare && t.op == CompareOp::Gt && t.args[0].is_lit(1) &&
         t.args[1].is_lit(0);
}

// Pure comparison: arithmetic over variables and constants only, movable
// into a binding guard.
bool is_pure_comparison(const MTerm& t) {
  if (t.kind != MTerm::Kind::Compare) return false;
  std::function<bool(const MTerm&)> pure = [&](const MTerm& x) {
    switch (x.kind) {
      case MTerm::Kind::IntLit:
      case MTerm::Kind::StrLit:
      case MTerm::Kind::VarRef:
        return true;
      case MTerm::Kind::Decode:
      case MTerm::Kind::Encode:
        return pure(x.args[0]);
      case MTerm::Kind::Add:
      case MTerm::Kind::Sub:
      case MTerm::Kind::Mul: {
        for (const auto& a : x.args)
          if (!pure(a)) return false;
        return true;
      }
      default:
        return false;
    }
  };
  return pure(t.args[0]) && pure(t.args[1]);
}

// Moves pure-comparison factors of a product into `guard`; returns true on
// change. `product` is rewritten in place.
bool push_factors_to_guard(MTerm& product, std::vector<MTerm>& guard) {
  if (is_pure_comparison(product)) {
    guard.push_back(product);
    product = MTerm::lit(1);
    return true;
  }
  if (product.kind != MTerm::Kind::Mul) return false;
  bool changed = false;
  std::vector<MTerm> kept;
  for (auto& f : product.args) {
    if (is_pure_comparison(f)) {
      guard.push_back(f);
      changed = true;
    } else {
      kept.push_back(f);
    }
  }
  if (changed) {
    if (kept.empty())
      product = MTerm::lit(1);
    else if (kept.size() == 1)
      product = MTerm(kept.front());
    else
      product.args = std::move(kept);
  }
  return changed;
}

// Sums push their body comparisons into their own guard at every depth.
bool push_guards_in_sums(MTerm& t) {
  bool changed = false;
  for (auto& a : t.args) changed |= push_guards_in_sums(a);
  if (t.kind == MTerm::Kind::Sum) changed |= push_factors_to_guard(t.args[0], t.guard);
  return changed;
}

}  // namespace

ConstraintModel pass_constraint_simplify(const ConstraintModel& m) {
  ConstraintModel out = m;
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& c : out.constraints) {
      walk_constraint_terms(c, [&](MTerm& t) { changed |= simplify_term(t); });
      walk_constraint_terms(c, [&](MTerm& t) { changed |= push_guards_in_sums(t); });
      // Comparisons under the truth test of an implication's left side hold
      // exactly when the binding guard holds; push them down.
      if (c.kind == MConstraint::Kind::Implies && c.lhs.kind == MTerm::Kind::Compare &&
          c.lhs.op == CompareOp::Gt && c.lhs.args[1].is_lit(0))
        changed |= push_factors_to_guard(c.lhs.args[0], c.guard);
    }
    if (out.objective) {
      changed |= simplify_term(out.objective->body);
      changed |= push_guards_in_sums(out.objective->body);
      for (auto& g : out.objective->guard) changed |= simplify_term(g);
    }
    std::size_t before = out.constraints.size();
    out.constraints.erase(
        std::remove_if(out.constraints.begin(), out.constraints.end(),
                       [](const MConstraint& c) {
                         return c.kind == MConstraint::Kind::Implies && !c.rhs_false &&
                                is_tautology(c.rhs);
                       }),
        out.constraints.end());
    changed |= before != out.constraints.size();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Arrays reduction
// ---------------------------------------------------------------------------

namespace {

struct Reduction {
  std::string array;
  std::string label_domain;
  std::string range_name;
  int lo = 0;
};

// Integer-code context tracking: variables rebound from a label domain to
// its integer range hold codes; everything else holds values.
using PositionVars = std::map<std::string, std::string>;  // var -> label domain

// domain name per coded dimension of each array ("" = value dimension).
using CodedDims = std::map<std::string, std::vector<std::string>>;

void rewrite_bindings(std::vector<MBinding>& bindings, std::vector<MTerm>& guard,
                      const Reduction& red, PositionVars* position_vars) {
  for (auto& b : bindings) {
    if (b.kind != MBinding::Kind::Domain || b.domain != red.label_domain) continue;
    std::string var = b.vars.front();
    b = MBinding::over_range(var, red.label_domain, red.range_name, red.lo);
    if (position_vars) (*position_vars)[var] = red.label_domain;
    if (red.lo == 0)
      guard.push_back(MTerm::compare(CompareOp::Ne, MTerm::var(var), MTerm::lit(0)));
  }
}

void rewrite_term_bindings(MTerm& t, const Reduction& red, PositionVars* position_vars) {
  if (t.kind == MTerm::Kind::Sum) rewrite_bindings(t.bindings, t.guard, red, position_vars);
  for (auto& a : t.args) rewrite_term_bindings(a, red, position_vars);
  for (auto& g : t.guard) rewrite_term_bindings(g, red, position_vars);
}

// Rewrites accesses s[i1..ik,L] into (s[i1..ik] == L'). The label term stays
// raw when it is already a code-carrying variable; constants and value
// variables are encoded.
void rewrite_accesses(MTerm& t, const Reduction& red, const PositionVars& position_vars) {
  for (auto& a : t.args) rewrite_accesses(a, red, position_vars);
  for (auto& g : t.guard) rewrite_accesses(g, red, position_vars);
  if (t.kind != MTerm::Kind::ArrayAccess || t.text != red.array || t.args.empty()) return;
  MTerm label = t.args.back();
  t.args.pop_back();
  bool is_code = label.kind == MTerm::Kind::VarRef && position_vars.count(label.text);
  if (!is_code) label = MTerm::encode(red.label_domain, std::move(label));
  t = MTerm::compare(CompareOp::Eq, MTerm(t), std::move(label));
}

// Index terms of coded dimensions must be codes: position variables pass
// through, anything else is wrapped in an encoding.
void fix_coded_indices(MTerm& t, const CodedDims& coded, const PositionVars& position_vars) {
  for (auto& a : t.args) fix_coded_indices(a, coded, position_vars);
  for (auto& g : t.guard) fix_coded_indices(g, coded, position_vars);
  if (t.kind != MTerm::Kind::ArrayAccess) return;
  auto it = coded.find(t.text);
  if (it == coded.end()) return;
  for (std::size_t i = 0; i < t.args.size() && i < it->second.size(); ++i) {
    const std::string& dom = it->second[i];
    if (dom.empty()) continue;
    MTerm& idx = t.args[i];
    if (idx.kind == MTerm::Kind::Encode) continue;
    if (idx.kind == MTerm::Kind::VarRef && position_vars.count(idx.text)) continue;
    idx = MTerm::encode(dom, std::move(idx));
  }
}

// Code variables decode when they take part in arithmetic or ordered
// comparisons; code-to-code equality stays in code space.
void rewrite_uses(MTerm& t, const PositionVars& position_vars, bool arithmetic_ctx) {
  switch (t.kind) {
    case MTerm::Kind::VarRef: {
      auto it = position_vars.find(t.text);
      if (it != position_vars.end() && arithmetic_ctx) t = MTerm::decode(it->second, t);
      return;
    }
    case MTerm::Kind::Decode:
    case MTerm::Kind::Encode:
      return;
    case MTerm::Kind::Compare: {
      auto code_domain = [&](const MTerm& x) -> const std::string* {
        if (x.kind != MTerm::Kind::VarRef) return nullptr;
        auto it = position_vars.find(x.text);
        return it == position_vars.end() ? nullptr : &it->second;
      };
      bool equality = t.op == CompareOp::Eq || t.op == CompareOp::Ne;
      const std::string* ld = code_domain(t.args[0]);
      const std::string* rd = code_domain(t.args[1]);
      if (equality && (ld || rd)) {
        if (ld && rd) return;  // codes of the label domain on both sides
        const std::string& dom = ld ? *ld : *rd;
        MTerm& other = ld ? t.args[1] : t.args[0];
        if (other.kind == MTerm::Kind::IntLit || other.kind == MTerm::Kind::StrLit)
          other = MTerm::encode(dom, std::move(other));
        else
          rewrite_uses(other, position_vars, true);
        return;
      }
      rewrite_uses(t.args[0], position_vars, true);
      rewrite_uses(t.args[1], position_vars, true);
      return;
    }
    case MTerm::Kind::ArrayAccess:
      for (auto& a : t.args) rewrite_uses(a, position_vars, false);
      return;
    case MTerm::Kind::Add:
    case MTerm::Kind::Sub:
      for (auto& a : t.args) rewrite_uses(a, position_vars, true);
      return;
    default:
      for (auto& a : t.args) rewrite_uses(a, position_vars, arithmetic_ctx);
      for (auto& g : t.guard) rewrite_uses(g, position_vars, false);
      return;
  }
}

}  // namespace

ConstraintModel pass_array_reduction(const ConstraintModel& m, Codebook* codebook) {
  ConstraintModel out = m;
  std::vector<Reduction> reductions;

  // Declarations: card/range definitions precede each reduced array; other
  // arrays indexed by a reduced label domain re-index over its range.
  std::vector<MDecl> decls;
  std::set<std::string> have_range;
  for (const auto& d : out.decls) {
    if (d.kind != MDecl::Kind::BoolArray || !d.from_partition || d.dims.empty()) {
      decls.push_back(d);
      continue;
    }
    Reduction red;
    red.array = d.name;
    red.label_domain = d.label_domain;
    red.lo = d.body_domain_only ? 1 : 0;
    red.range_name = "int" + red.label_domain;

    if (have_range.insert(red.range_name).second) {
      MDecl card;
      card.kind = MDecl::Kind::CardConst;
      card.name = "card" + red.label_domain;
      card.domain = red.label_domain;
      decls.push_back(card);
      MDecl range;
      range.kind = MDecl::Kind::RangeDef;
      range.name = red.range_name;
      range.lo = red.lo;
      range.card = card.name;
      decls.push_back(range);
    }
    MDecl reduced = d;
    reduced.kind = MDecl::Kind::IntArray;
    reduced.dims.pop_back();
    reduced.range = red.range_name;
    decls.push_back(std::move(reduced));
    reductions.push_back(std::move(red));
  }
  if (reductions.empty()) return out;

  CodedDims coded;
  for (auto& d : decls) {
    if (d.kind == MDecl::Kind::CardConst || d.kind == MDecl::Kind::RangeDef) continue;
    std::vector<std::string> dims_coded(d.dims.size());
    bool any = false;
    for (std::size_t i = 0; i < d.dims.size(); ++i)
      for (const auto& red : reductions)
        if (d.dims[i] == red.label_domain) {
          d.dims[i] = red.range_name;
          dims_coded[i] = red.label_domain;
          any = true;
          if (codebook && codebook->arrays.count(d.name))
            codebook->arrays[d.name].dim_is_code[i] = true;
        }
    if (any) coded[d.name] = std::move(dims_coded);
  }
  out.decls = std::move(decls);

  // Existence constraints: dropped in the 1..|d| case, weakened to "some
  // nonzero code" otherwise.
  for (const auto& red : reductions) {
    std::vector<MConstraint> kept;
    for (auto& c : out.constraints) {
      if (c.origin == MConstraint::Origin::PartitionExistence && c.origin_array == red.array) {
        if (red.lo == 1) continue;
        if (c.rhs.kind == MTerm::Kind::Compare && c.rhs.op == CompareOp::Eq) {
          c.rhs.op = CompareOp::Gt;
          c.rhs.args[1] = MTerm::lit(0);
        }
      }
      kept.push_back(std::move(c));
    }
    out.constraints = std::move(kept);
  }

  for (auto& c : out.constraints) {
    PositionVars position_vars;
    for (const auto& red : reductions) {
      rewrite_bindings(c.bindings, c.guard, red, &position_vars);
      walk_constraint_terms(c, [&](MTerm& t) { rewrite_term_bindings(t, red, &position_vars); });
    }
    for (const auto& red : reductions)
      walk_constraint_terms(c, [&](MTerm& t) { rewrite_accesses(t, red, position_vars); });
    walk_constraint_terms(c, [&](MTerm& t) { fix_coded_indices(t, coded, position_vars); });
    walk_constraint_terms(c, [&](MTerm& t) { rewrite_uses(t, position_vars, false); });
  }
  if (out.objective) {
    PositionVars position_vars;
    for (const auto& red : reductions) {
      rewrite_bindings(out.objective->bindings, out.objective->guard, red, &position_vars);
      rewrite_term_bindings(out.objective->body, red, &position_vars);
    }
    for (const auto& red : reductions)
      rewrite_accesses(out.objective->body, red, position_vars);
    fix_coded_indices(out.objective->body, coded, position_vars);
    rewrite_uses(out.objective->body, position_vars, false);
  }

  if (codebook) {
    for (const auto& red : reductions) {
      codebook->coded_domains[red.label_domain] = red.lo;
      auto it = codebook->arrays.find(red.array);
      if (it != codebook->arrays.end()) {
        it->second.reduced = true;
        it->second.label_domain = red.label_domain;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Variable deletion
// ---------------------------------------------------------------------------

namespace {

int count_var_uses(const MTerm& t, const std::string& var) {
  int n = t.kind == MTerm::Kind::VarRef && t.text == var ? 1 : 0;
  for (const auto& a : t.args) n += count_var_uses(a, var);
  for (const auto& g : t.guard) n += count_var_uses(g, var);
  return n;
}

// Matches (A[i..] == var) with var not occurring in the indices; returns the
// access on success.
const MTerm* equate_factor(const MTerm& f, const std::string& var) {
  if (f.kind != MTerm::Kind::Compare || f.op != CompareOp::Eq) return nullptr;
  const MTerm* access = nullptr;
  const MTerm* other = nullptr;
  if (f.args[0].kind == MTerm::Kind::ArrayAccess) access = &f.args[0], other = &f.args[1];
  else if (f.args[1].kind == MTerm::Kind::ArrayAccess) access = &f.args[1], other = &f.args[0];
  if (!access || other->kind != MTerm::Kind::VarRef || other->text != var) return nullptr;
  if (count_var_uses(*access, var) > 0) return nullptr;
  return access;
}

}  // namespace

ConstraintModel pass_variable_deletion(const ConstraintModel& m) {
  ConstraintModel out = m;
  for (auto& c : out.constraints) {
    for (std::size_t bi = 0; bi < c.bindings.size();) {
      const MBinding& b = c.bindings[bi];
      bool advance = true;
      if (b.vars.size() == 1) {
        const std::string& var = b.vars.front();
        int uses = count_var_uses(c.lhs, var) + (c.rhs_false ? 0 : count_var_uses(c.rhs, var));
        for (const auto& g : c.guard) uses += count_var_uses(g, var);

        if (uses == 0) {
          // Unused binding: iterating it only repeats the same constraint.
          c.bindings.erase(c.bindings.begin() + static_cast<std::ptrdiff_t>(bi));
          advance = false;
        } else if (b.kind == MBinding::Kind::IntRange && b.lo >= 1 &&
                   c.kind == MConstraint::Kind::Implies &&
                   c.lhs.kind == MTerm::Kind::Compare && c.lhs.op == CompareOp::Gt &&
                   c.lhs.args[1].is_lit(0) && c.lhs.args[0].kind == MTerm::Kind::Mul) {
          // Exactly two (A == var) factors and no other use: equate directly.
          MTerm& product = c.lhs.args[0];
          std::vector<std::size_t> hits;
          int qualified_uses = 0;
          for (std::size_t i = 0; i < product.args.size(); ++i)
            if (const MTerm* a = equate_factor(product.args[i], var)) {
              hits.push_back(i);
              qualified_uses += 1;
              (void)a;
            }
          if (hits.size() == 2 && uses == qualified_uses) {
            MTerm left = MTerm(*equate_factor(product.args[hits[0]], var));
            MTerm right = MTerm(*equate_factor(product.args[hits[1]], var));
            product.args[hits[0]] = MTerm::compare(CompareOp::Eq, std::move(left),
                                                   std::move(right));
            product.args.erase(product.args.begin() + static_cast<std::ptrdiff_t>(hits[1]));
            if (product.args.size() == 1) product = MTerm(product.args.front());
            c.bindings.erase(c.bindings.begin() + static_cast<std::ptrdiff_t>(bi));
            advance = false;
          }
        }
      }
      if (advance) ++bi;
    }
  }
  return out;
}

ConstraintModel optimize(const ConstraintModel& m, const Schema& schema,
                         const OptimizeOptions& opts, Codebook* codebook) {
  ConstraintModel cur = m;
  if (opts.range_restriction) cur = pass_range_restriction(cur, schema);
  if (opts.constraint_simplify) cur = pass_constraint_simplify(cur);
  if (opts.array_reduction) cur = pass_array_reduction(cur, codebook);
  if (opts.variable_deletion) cur = pass_variable_deletion(cur);
  if (opts.constraint_simplify) cur = pass_constraint_simplify(cur);
  return cur;
}

}  // namespace npdl
