#include "npdl/transpile.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace npdl {

std::string model_var(const std::string& source_var) {
  std::string out = source_var;
  if (!out.empty()) out[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[0])));
  return out;
}

namespace {

std::vector<std::string> vars_in_order(const Conjunction& conj) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  auto add = [&](const std::string& v) {
    if (seen.insert(v).second) order.push_back(v);
  };
  for (const auto& lit : conj) {
    if (lit.kind == Literal::Kind::Compare) {
      std::vector<std::string> vs;
      collect_vars(lit.cmp.lhs, vs);
      collect_vars(lit.cmp.rhs, vs);
      for (const auto& v : vs) add(v);
    } else {
      for (const auto& t : lit.atom.args)
        if (t.is_var()) add(t.var);
    }
  }
  return order;
}

MTerm term_of_arg(const Term& t) {
  if (t.is_var()) return MTerm::var(model_var(t.var));
  if (std::holds_alternative<std::int64_t>(t.value))
    return MTerm::lit(std::get<std::int64_t>(t.value));
  return MTerm::str(std::get<std::string>(t.value));
}

MTerm term_of_expr(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Var: return MTerm::var(model_var(e.var));
    case Expr::Kind::Int: return MTerm::lit(e.value);
    case Expr::Kind::Str: return MTerm::str(e.var);
    case Expr::Kind::Add: return MTerm::add({term_of_expr(e.args[0]), term_of_expr(e.args[1])});
    case Expr::Kind::Sub: return MTerm::sub(term_of_expr(e.args[0]), term_of_expr(e.args[1]));
    case Expr::Kind::Mul: return MTerm::mul({term_of_expr(e.args[0]), term_of_expr(e.args[1])});
  }
  return MTerm::lit(0);
}

// The membership test (sum(<args> in rel) 1 > 0) of an atom over stored data.
MTerm membership_test(const std::string& rel, const std::vector<Term>& args, bool domain) {
  MBinding b;
  if (domain) {
    assert(args.size() == 1 && args.front().is_var());
    b = MBinding::over_domain(model_var(args.front().var), rel);
  } else {
    std::vector<std::string> vars;
    for (const auto& t : args) {
      if (!t.is_var())
        throw std::logic_error("constants in atoms must be hoisted before translation");
      vars.push_back(model_var(t.var));
    }
    b = MBinding::over_tuple(std::move(vars), rel);
  }
  return MTerm::compare(CompareOp::Gt, MTerm::sum({std::move(b)}, MTerm::lit(1)), MTerm::lit(0));
}

MTerm translate_atom(const TranslationContext& ctx, const Atom& a) {
  if (ctx.derived.count(a.pred)) {
    std::vector<MTerm> idx;
    for (const auto& t : a.args) idx.push_back(term_of_arg(t));
    return MTerm::access(a.pred, std::move(idx));
  }
  return membership_test(a.pred, a.args, ctx.schema->is_domain(a.pred));
}

MTerm translate_literal(const TranslationContext& ctx, const Literal& lit) {
  switch (lit.kind) {
    case Literal::Kind::Atom: return translate_atom(ctx, lit.atom);
    case Literal::Kind::NegAtom:
      return MTerm::sub(MTerm::lit(1), translate_atom(ctx, lit.atom));
    case Literal::Kind::Compare:
      return MTerm::compare(lit.cmp.op, term_of_expr(lit.cmp.lhs), term_of_expr(lit.cmp.rhs));
  }
  return MTerm::lit(1);
}

MTerm translate_conjunction(const TranslationContext& ctx, const Conjunction& conj) {
  std::vector<MTerm> factors;
  for (const auto& lit : conj) factors.push_back(translate_literal(ctx, lit));
  if (factors.empty()) return MTerm::lit(1);
  if (factors.size() == 1) return std::move(factors.front());
  return MTerm::mul(std::move(factors));
}

std::vector<MBinding> head_bindings(const TranslationContext& ctx, const Atom& head,
                                    std::size_t count) {
  auto sig = ctx.schema->predicates.find(head.pred);
  if (sig == ctx.schema->predicates.end())
    throw std::logic_error("predicate '" + head.pred + "' has no inferred signature");
  std::vector<MBinding> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (!head.args[i].is_var())
      throw std::logic_error("head constants must be hoisted before translation");
    out.push_back(MBinding::over_domain(model_var(head.args[i].var), sig->second[i]));
  }
  return out;
}

std::vector<std::string> existentials_of(const Conjunction& conj,
                                         const std::set<std::string>& bound) {
  std::vector<std::string> out;
  for (const auto& v : vars_in_order(conj))
    if (!bound.count(v)) out.push_back(v);
  return out;
}

}  // namespace

MTerm translate_body(const TranslationContext& ctx, const Conjunction& conj,
                     const std::vector<std::string>& existentials,
                     const std::map<std::string, std::string>& var_domains) {
  MTerm inner = translate_conjunction(ctx, conj);
  if (existentials.empty()) return inner;
  std::vector<MBinding> bindings;
  for (const auto& v : existentials) {
    auto it = var_domains.find(v);
    if (it == var_domains.end())
      throw std::logic_error("no domain for existential variable '" + v + "'");
    bindings.push_back(MBinding::over_domain(model_var(v), it->second));
  }
  return MTerm::sum(std::move(bindings), std::move(inner));
}

std::vector<MConstraint> translate_partition_rule(const TranslationContext& ctx, const Rule& r) {
  assert(r.kind == RuleKind::GeneralizedPartition);
  const Atom& head = r.head.front();
  const Conjunction& full = r.body.front();
  Conjunction body(full.begin(), std::prev(full.end()));  // drop the label atom d(L)
  const std::string label_domain = full.back().atom.pred;
  const std::string label = model_var(r.label_var);

  std::set<std::string> bound;
  for (std::size_t i = 0; i + 1 < head.args.size(); ++i) bound.insert(head.args[i].var);
  auto exist = existentials_of(body, bound);
  auto domains = conjunct_var_domains(full, *ctx.schema);
  MTerm body_truth =
      MTerm::compare(CompareOp::Gt, translate_body(ctx, body, exist, domains), MTerm::lit(0));

  std::vector<MTerm> cell_idx;
  for (const auto& t : head.args) cell_idx.push_back(term_of_arg(t));
  MTerm cell = MTerm::access(head.pred, cell_idx);

  MConstraint existence;
  existence.kind = MConstraint::Kind::Implies;
  existence.bindings = head_bindings(ctx, head, head.args.size() - 1);
  existence.lhs = body_truth;
  existence.rhs = MTerm::compare(
      CompareOp::Eq, MTerm::sum({MBinding::over_domain(label, label_domain)}, cell),
      MTerm::lit(1));
  existence.origin = MConstraint::Origin::PartitionExistence;
  existence.origin_array = head.pred;

  MConstraint support;
  support.kind = MConstraint::Kind::Implies;
  support.bindings = head_bindings(ctx, head, head.args.size() - 1);
  support.bindings.push_back(MBinding::over_domain(label, label_domain));
  support.lhs = MTerm::compare(CompareOp::Gt, cell, MTerm::lit(0));
  support.rhs = body_truth;
  support.origin = MConstraint::Origin::PartitionSupport;
  support.origin_array = head.pred;

  return {std::move(existence), std::move(support)};
}

std::vector<MConstraint> translate_subset_rule(const TranslationContext& ctx, const Rule& r) {
  assert(r.kind == RuleKind::Subset);
  const Atom& head = r.head.front();
  const Conjunction& body = r.body.front();

  std::set<std::string> bound;
  for (const auto& t : head.args) bound.insert(t.var);
  auto exist = existentials_of(body, bound);
  auto domains = conjunct_var_domains(body, *ctx.schema);

  std::vector<MTerm> cell_idx;
  for (const auto& t : head.args) cell_idx.push_back(term_of_arg(t));

  MConstraint support;
  support.kind = MConstraint::Kind::Implies;
  support.bindings = head_bindings(ctx, head, head.args.size());
  support.lhs =
      MTerm::compare(CompareOp::Gt, MTerm::access(head.pred, cell_idx), MTerm::lit(0));
  support.rhs =
      MTerm::compare(CompareOp::Gt, translate_body(ctx, body, exist, domains), MTerm::lit(0));
  support.origin = MConstraint::Origin::SubsetSupport;
  support.origin_array = head.pred;
  return {std::move(support)};
}

std::vector<MConstraint> translate_standard_rule(const TranslationContext& ctx, const Rule& r) {
  assert(r.kind == RuleKind::Standard);
  const Atom& head = r.head.front();
  std::set<std::string> bound;
  for (const auto& t : head.args) bound.insert(t.var);

  std::vector<MTerm> disjuncts;
  for (const auto& conj : r.body) {
    auto exist = existentials_of(conj, bound);
    auto domains = conjunct_var_domains(conj, *ctx.schema);
    disjuncts.push_back(translate_body(ctx, conj, exist, domains));
  }
  MTerm sum = disjuncts.size() == 1 ? std::move(disjuncts.front())
                                    : MTerm::add(std::move(disjuncts));

  std::vector<MTerm> cell_idx;
  for (const auto& t : head.args) cell_idx.push_back(term_of_arg(t));

  MConstraint def;
  def.kind = MConstraint::Kind::Iff;
  def.bindings = head_bindings(ctx, head, head.args.size());
  def.lhs = MTerm::compare(CompareOp::Gt, MTerm::access(head.pred, cell_idx), MTerm::lit(0));
  def.rhs = MTerm::compare(CompareOp::Gt, std::move(sum), MTerm::lit(0));
  def.origin = MConstraint::Origin::StandardDef;
  def.origin_array = head.pred;
  return {std::move(def)};
}

std::vector<MConstraint> translate_constraint(const TranslationContext& ctx, const Rule& r) {
  assert(r.kind == RuleKind::Constraint);
  const Conjunction& body = r.body.front();
  auto domains = conjunct_var_domains(body, *ctx.schema);

  MConstraint c;
  c.kind = MConstraint::Kind::Implies;
  for (const auto& v : vars_in_order(body)) {
    auto it = domains.find(v);
    if (it == domains.end())
      throw std::logic_error("no domain for constraint variable '" + v + "'");
    c.bindings.push_back(MBinding::over_domain(model_var(v), it->second));
  }
  c.lhs = MTerm::compare(CompareOp::Gt, translate_conjunction(ctx, body), MTerm::lit(0));
  if (r.head.empty()) {
    c.rhs_false = true;
  } else {
    std::vector<MTerm> alts;
    for (const auto& h : r.head) alts.push_back(translate_atom(ctx, h));
    MTerm sum = alts.size() == 1 ? std::move(alts.front()) : MTerm::add(std::move(alts));
    c.rhs = MTerm::compare(CompareOp::Gt, std::move(sum), MTerm::lit(0));
  }
  c.origin = MConstraint::Origin::UserConstraint;
  return {std::move(c)};
}

std::vector<MDecl> build_declarations(const Program& p, const ComponentPartition& part,
                                      const Schema& schema, Diagnostics* diags) {
  std::set<int> p2_rules(part.p2_g.begin(), part.p2_g.end());
  for (int i : part.p2_s) p2_rules.insert(i);
  std::set<int> p2_constraints(part.p2_c.begin(), part.p2_c.end());

  std::vector<MDecl> decls;
  std::set<std::string> declared;

  // Decision arrays, in source order of the defining rules.
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    if (!p2_rules.count(static_cast<int>(i))) continue;
    const Rule& r = p.rules[i];
    const std::string& pred = r.head.front().pred;
    if (!declared.insert(pred).second) continue;
    auto sig = schema.predicates.find(pred);
    if (sig == schema.predicates.end()) {
      if (diags)
        diags->push_back(error_at(static_cast<int>(i),
                                  "predicate '" + pred + "' has no inferred signature"));
      continue;
    }
    MDecl d;
    d.kind = MDecl::Kind::BoolArray;
    d.name = pred;
    d.dims = sig->second;
    if (r.kind == RuleKind::GeneralizedPartition) {
      d.from_partition = true;
      d.label_domain = r.body.front().back().atom.pred;
      d.body_domain_only = true;
      const Conjunction& body = r.body.front();
      for (std::size_t k = 0; k + 1 < body.size(); ++k)
        d.body_domain_only = d.body_domain_only &&
                             body[k].kind == Literal::Kind::Atom &&
                             schema.is_domain(body[k].atom.pred);
    }
    decls.push_back(std::move(d));
  }

  // Known-value arrays for IDB predicates referenced but not defined in P2.
  auto reference = [&](const std::string& pred) {
    if (declared.count(pred) || schema.is_domain(pred)) return;
    auto sig = schema.predicates.find(pred);
    if (sig == schema.predicates.end()) return;  // base preds carry data, not arrays
    bool idb = false;
    for (const auto& r : p.rules)
      for (const auto& h : r.head) idb |= h.pred == pred;
    if (!idb) return;
    declared.insert(pred);
    MDecl d;
    d.kind = MDecl::Kind::KnownArray;
    d.name = pred;
    d.dims = sig->second;
    decls.push_back(std::move(d));
  };
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    if (!p2_rules.count(static_cast<int>(i)) && !p2_constraints.count(static_cast<int>(i)))
      continue;
    const Rule& r = p.rules[i];
    for (const auto& h : r.head) reference(h.pred);
    for (const auto& conj : r.body)
      for (const auto& lit : conj)
        if (lit.kind != Literal::Kind::Compare) reference(lit.atom.pred);
  }
  return decls;
}

std::optional<MObjective> translate_goal(const Goal& goal, const Schema& schema,
                                         const std::set<std::string>& p2_defined,
                                         Diagnostics* diags) {
  if (goal.mode == Goal::Mode::Plain) return std::nullopt;
  const Atom& g = goal.atom;
  if (!p2_defined.count(g.pred)) {
    if (diags)
      diags->push_back(error_at(-1, "optimization goal '" + g.pred +
                                        "' must be defined in the non-deterministic component"));
    return std::nullopt;
  }
  auto sig = schema.predicates.find(g.pred);
  std::set<std::string> seen;
  for (const auto& t : g.args)
    if (!t.is_var() || !seen.insert(t.var).second) {
      if (diags)
        diags->push_back(
            error_at(-1, "an optimization goal must range over distinct variables"));
      return std::nullopt;
    }

  MObjective obj;
  obj.maximize = goal.mode == Goal::Mode::Max;
  std::vector<MTerm> idx;
  for (std::size_t i = 0; i < g.args.size(); ++i) {
    obj.bindings.push_back(MBinding::over_domain(model_var(g.args[i].var), sig->second[i]));
    idx.push_back(MTerm::var(model_var(g.args[i].var)));
  }
  obj.body = MTerm::access(g.pred, std::move(idx));
  return obj;
}

TranspileResult assemble_model(const AnalyzedQuery& aq) {
  TranspileResult res;
  res.model.decls = build_declarations(aq.program, aq.partition, aq.schema, &res.diagnostics);

  TranslationContext ctx;
  ctx.schema = &aq.schema;
  std::set<std::string> p2_defined;
  for (const auto& d : res.model.decls) {
    ctx.derived.insert(d.name);
    if (d.kind == MDecl::Kind::BoolArray) p2_defined.insert(d.name);
  }

  if (aq.program.goal)
    res.model.objective =
        translate_goal(*aq.program.goal, aq.schema, p2_defined, &res.diagnostics);

  auto translate_group = [&](const std::vector<int>& idx) {
    std::vector<int> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    for (int i : sorted) {
      const Rule& r = aq.program.rules[i];
      std::vector<MConstraint> cs;
      switch (r.kind) {
        case RuleKind::GeneralizedPartition: cs = translate_partition_rule(ctx, r); break;
        case RuleKind::Subset: cs = translate_subset_rule(ctx, r); break;
        case RuleKind::Standard: cs = translate_standard_rule(ctx, r); break;
        case RuleKind::Constraint: cs = translate_constraint(ctx, r); break;
        case RuleKind::Partition:
          throw std::logic_error("partition rules must be normalized before translation");
      }
      for (auto& c : cs) res.model.constraints.push_back(std::move(c));
    }
  };
  translate_group(aq.partition.p2_g);
  translate_group(aq.partition.p2_s);
  translate_group(aq.partition.p2_c);

  for (const auto& d : res.model.decls) {
    if (d.kind != MDecl::Kind::BoolArray && d.kind != MDecl::Kind::KnownArray) continue;
    Codebook::ArrayInfo info;
    info.dims = d.dims;
    info.dim_is_code.assign(d.dims.size(), false);
    res.codebook.arrays.emplace(d.name, std::move(info));
  }
  return res;
}

ConstraintModel constraints_only_model(const Program& p, const std::vector<int>& constraint_idx,
                                       const Schema& schema) {
  ConstraintModel model;
  TranslationContext ctx;
  ctx.schema = &schema;

  std::set<std::string> idb;
  for (const auto& r : p.rules)
    for (const auto& h : r.head) idb.insert(h.pred);

  std::set<std::string> declared;
  auto reference = [&](const std::string& pred) {
    if (!idb.count(pred) || schema.is_domain(pred)) return;
    if (!declared.insert(pred).second) return;
    auto sig = schema.predicates.find(pred);
    if (sig == schema.predicates.end()) return;
    MDecl d;
    d.kind = MDecl::Kind::KnownArray;
    d.name = pred;
    d.dims = sig->second;
    model.decls.push_back(std::move(d));
    ctx.derived.insert(pred);
  };
  for (int i : constraint_idx) {
    const Rule& r = p.rules[i];
    for (const auto& h : r.head) reference(h.pred);
    for (const auto& conj : r.body)
      for (const auto& lit : conj)
        if (lit.kind != Literal::Kind::Compare) reference(lit.atom.pred);
  }
  for (int i : constraint_idx)
    for (auto& c : translate_constraint(ctx, p.rules[i]))
      model.constraints.push_back(std::move(c));
  return model;
}

}  // namespace npdl
