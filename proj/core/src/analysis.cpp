#include "npdl/analysis.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>

#include "npdl/printer.hpp"

namespace npdl {

namespace {

template <class F>
void for_each_conjunct(const Rule& r, F&& f) {
  for (const auto& conj : r.body) f(conj);
}

std::set<std::string> idb_preds(const Program& p) {
  std::set<std::string> out;
  for (const auto& r : p.rules)
    for (const auto& a : r.head) out.insert(a.pred);
  return out;
}

std::vector<std::string> conjunct_vars_in_order(const Conjunction& conj) {
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

}  // namespace

// ---------------------------------------------------------------------------
// Dependency graph
// ---------------------------------------------------------------------------

DependencyGraph build_dependency_graph(const Program& p) {
  DependencyGraph g;
  for (const auto& r : p.rules) {
    for (const auto& h : r.head) g.nodes.insert(h.pred);
    for_each_conjunct(r, [&](const Conjunction& conj) {
      for (const auto& lit : conj) {
        if (lit.kind == Literal::Kind::Compare) continue;
        g.nodes.insert(lit.atom.pred);
        for (const auto& h : r.head) {
          g.uses[h.pred].insert(lit.atom.pred);
          if (lit.kind == Literal::Kind::Atom)
            g.positive_edges[lit.atom.pred].insert(h.pred);
          else
            g.negative_edges[lit.atom.pred].insert(h.pred);
        }
        // Constraints have no head; they still mention predicates, which is
        // all the component routing needs.
      }
    });
  }
  return g;
}

std::set<std::string> dependencies_of(const DependencyGraph& g, const std::string& seed) {
  std::set<std::string> out;
  std::vector<std::string> work;
  auto push = [&](const std::string& q) {
    if (out.insert(q).second) work.push_back(q);
  };
  auto it = g.uses.find(seed);
  if (it != g.uses.end())
    for (const auto& q : it->second) push(q);
  while (!work.empty()) {
    std::string q = work.back();
    work.pop_back();
    auto jt = g.uses.find(q);
    if (jt != g.uses.end())
      for (const auto& r : jt->second) push(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Safety
// ---------------------------------------------------------------------------

Diagnostics check_safety(const Program& p) {
  Diagnostics out;
  for (std::size_t ri = 0; ri < p.rules.size(); ++ri) {
    const Rule& r = p.rules[ri];
    std::set<std::string> reported;
    for (const auto& conj : r.body) {
      std::set<std::string> bound;
      for (const auto& lit : conj)
        if (lit.kind == Literal::Kind::Atom)
          for (const auto& t : lit.atom.args)
            if (t.is_var()) bound.insert(t.var);

      auto require = [&](const std::string& v, const char* where) {
        if (bound.count(v) || !reported.insert(v).second) return;
        out.push_back(error_at(static_cast<int>(ri),
                               "unsafe variable '" + v + "' in " + where +
                                   " does not occur in a positive body literal"));
      };
      for (const auto& h : r.head)
        for (const auto& t : h.args)
          if (t.is_var()) require(t.var, "the head");
      for (const auto& lit : conj) {
        if (lit.kind == Literal::Kind::NegAtom) {
          for (const auto& t : lit.atom.args)
            if (t.is_var()) require(t.var, "a negated literal");
        } else if (lit.kind == Literal::Kind::Compare) {
          std::vector<std::string> vs;
          collect_vars(lit.cmp.lhs, vs);
          collect_vars(lit.cmp.rhs, vs);
          for (const auto& v : vs) require(v, "a comparison");
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stratification
// ---------------------------------------------------------------------------

StratifyResult stratify_rules(const std::vector<Rule>& rules) {
  StratifyResult res;
  std::map<std::string, int> stratum;
  std::set<std::string> defined;
  for (const auto& r : rules)
    if (r.kind == RuleKind::Standard) {
      defined.insert(r.head.front().pred);
      stratum[r.head.front().pred] = 0;
    }

  // Relax stratum levels to a fixpoint. Levels in a stratified program never
  // exceed the predicate count; a level beyond that witnesses a negative
  // cycle.
  const int cap = static_cast<int>(defined.size());
  bool changed = true;
  bool diverged = false;
  while (changed && !diverged) {
    changed = false;
    for (const auto& r : rules) {
      if (r.kind != RuleKind::Standard) continue;
      int& h = stratum[r.head.front().pred];
      for (const auto& conj : r.body)
        for (const auto& lit : conj) {
          if (lit.kind == Literal::Kind::Compare) continue;
          if (!defined.count(lit.atom.pred)) continue;
          int need = stratum[lit.atom.pred] + (lit.kind == Literal::Kind::NegAtom ? 1 : 0);
          if (h < need) {
            h = need;
            changed = true;
            diverged = diverged || h > cap;
          }
        }
    }
  }
  if (diverged) {
    // A negative edge sits inside a dependency cycle; report the smallest
    // unstratifiable predicate set by walking the offending components.
    std::set<std::string> cycle;
    for (const auto& r : rules) {
      if (r.kind != RuleKind::Standard) continue;
      const std::string& h = r.head.front().pred;
      for (const auto& conj : r.body)
        for (const auto& lit : conj) {
          if (lit.kind != Literal::Kind::NegAtom || !defined.count(lit.atom.pred)) continue;
          // h negatively depends on q; unstratifiable when q also reaches h.
          const std::string& q = lit.atom.pred;
          std::set<std::string> seen{q};
          std::vector<std::string> work{q};
          bool reaches = q == h;
          while (!work.empty() && !reaches) {
            std::string cur = work.back();
            work.pop_back();
            for (const auto& rr : rules) {
              if (rr.kind != RuleKind::Standard) continue;
              bool mentions = false;
              for (const auto& cj : rr.body)
                for (const auto& l2 : cj)
                  mentions |= l2.kind != Literal::Kind::Compare && l2.atom.pred == cur;
              if (!mentions) continue;
              const std::string& hh = rr.head.front().pred;
              if (hh == h) {
                reaches = true;
                break;
              }
              if (seen.insert(hh).second) work.push_back(hh);
            }
          }
          if (reaches) {
            cycle = seen;
            cycle.insert(h);
          }
        }
    }
    std::string names;
    for (const auto& n : cycle) names += (names.empty() ? "" : ", ") + n;
    res.diagnostics.push_back(
        error_at(-1, "negation is not stratified: cycle through {" + names + "}"));
    return res;
  }

  int max_stratum = 0;
  for (const auto& [pred, s] : stratum) max_stratum = std::max(max_stratum, s);
  res.strata.assign(defined.empty() ? 0 : max_stratum + 1, {});
  for (std::size_t i = 0; i < rules.size(); ++i)
    if (rules[i].kind == RuleKind::Standard)
      res.strata[stratum[rules[i].head.front().pred]].push_back(static_cast<int>(i));
  // Drop empty strata (possible when predicates share levels unevenly).
  std::vector<std::vector<int>> packed;
  for (auto& s : res.strata)
    if (!s.empty()) packed.push_back(std::move(s));
  res.strata = std::move(packed);
  return res;
}

StratifyResult stratify(const Program& p) { return stratify_rules(p.rules); }

// ---------------------------------------------------------------------------
// Schema inference
// ---------------------------------------------------------------------------

namespace {

std::string join_parts(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string union_domain_name(const std::vector<std::string>& parts) {
  return join_parts(parts, "_or_");
}

std::string intersection_domain_name(const std::vector<std::string>& parts) {
  return join_parts(parts, "_and_");
}

std::string partition_label_domain_name(const std::string& pred) { return pred + "_labels"; }

namespace {

// Registers (or finds) a derived domain; returns its name.
std::string ensure_derived(Schema& schema, DerivedDomain dd, std::string name) {
  auto it = schema.derived_domains.find(name);
  while (it != schema.derived_domains.end() && !(it->second == dd)) {
    name += "_x";
    it = schema.derived_domains.find(name);
  }
  schema.derived_domains.emplace(name, std::move(dd));
  return name;
}

std::string resolve_domains(Schema& schema, const std::vector<std::string>& domains) {
  if (domains.size() == 1) return domains.front();
  DerivedDomain dd;
  dd.kind = DerivedDomain::Kind::Intersection;
  dd.parts = domains;
  return ensure_derived(schema, std::move(dd), intersection_domain_name(domains));
}

// Domains constraining each variable of a conjunct, in occurrence order and
// without duplicates. Only positive predicate literals constrain.
std::map<std::string, std::vector<std::string>> var_domain_sets(const Conjunction& conj,
                                                                const Schema& schema) {
  std::map<std::string, std::vector<std::string>> out;
  auto add = [&](const std::string& v, const std::string& dom) {
    auto& ds = out[v];
    if (std::find(ds.begin(), ds.end(), dom) == ds.end()) ds.push_back(dom);
  };
  for (const auto& lit : conj) {
    if (lit.kind != Literal::Kind::Atom) continue;
    const Atom& a = lit.atom;
    if (schema.is_domain(a.pred)) {
      if (a.args.size() == 1 && a.args.front().is_var()) add(a.args.front().var, a.pred);
      continue;
    }
    auto sig = schema.predicates.find(a.pred);
    if (sig == schema.predicates.end()) continue;  // not yet inferred
    for (std::size_t i = 0; i < a.args.size() && i < sig->second.size(); ++i)
      if (a.args[i].is_var()) add(a.args[i].var, sig->second[i]);
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> conjunct_var_domains(const Conjunction& c,
                                                        const Schema& schema) {
  std::map<std::string, std::string> out;
  Schema scratch = schema;  // lookups only; derived domains must already exist
  for (auto& [v, ds] : var_domain_sets(c, schema)) out[v] = resolve_domains(scratch, ds);
  return out;
}

Schema infer_schemas(const Program& p, const Schema& base, Diagnostics* diags) {
  Schema schema = base;

  // Pre-register label domains of single-predicate partition rules so the
  // inferred signature and the later rewriting agree on the name.
  for (const auto& r : p.rules) {
    if (r.kind != RuleKind::Partition) continue;
    bool same_pred = true;
    for (const auto& h : r.head) same_pred = same_pred && h.pred == r.head.front().pred;
    if (!same_pred) continue;
    DerivedDomain dd;
    dd.kind = DerivedDomain::Kind::Enumeration;
    for (const auto& h : r.head) dd.constants.push_back(h.args.back().value);
    ensure_derived(schema, std::move(dd), partition_label_domain_name(r.head.front().pred));
  }

  // Per-predicate, per-position candidate domains (one entry per alternative
  // rule/conjunct); alternatives from different domains become a union.
  for (int round = 0; round < 64; ++round) {
    bool changed = false;
    std::map<std::string, std::vector<std::vector<std::string>>> candidates;

    for (const auto& r : p.rules) {
      for (const auto& conj : r.body) {
        auto sets = var_domain_sets(conj, schema);
        // Register intersection domains for every multi-domain variable up
        // front; grounding looks the names up later even for variables that
        // never reach a head.
        for (auto& [v, ds] : sets) resolve_domains(schema, ds);
        if (r.kind == RuleKind::Constraint) continue;
        auto head_domain = [&](const Term& t) -> std::string {
          if (t.is_var()) {
            auto it = sets.find(t.var);
            if (it == sets.end()) return {};
            return resolve_domains(schema, it->second);
          }
          return {};
        };
        for (const auto& h : r.head) {
          auto& slots = candidates[h.pred];
          slots.resize(std::max(slots.size(), h.args.size()));
          bool partition_constant_form =
              r.kind == RuleKind::Partition && !h.args.empty() && !h.args.back().is_var();
          for (std::size_t i = 0; i < h.args.size(); ++i) {
            std::string dom;
            if (r.kind == RuleKind::GeneralizedPartition && i + 1 == h.args.size()) {
              dom = r.body.front().back().atom.pred;  // the label domain atom
            } else if (partition_constant_form && i + 1 == h.args.size()) {
              dom = partition_label_domain_name(h.pred);
            } else {
              dom = head_domain(h.args[i]);
            }
            if (dom.empty()) continue;
            auto& alts = slots[i];
            if (std::find(alts.begin(), alts.end(), dom) == alts.end()) alts.push_back(dom);
          }
        }
      }
    }

    for (auto& [pred, slots] : candidates) {
      if (schema.predicates.count(pred) && base.predicates.count(pred)) continue;
      std::vector<std::string> sig(slots.size());
      bool complete = true;
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].empty()) {
          complete = false;
          break;
        }
        if (slots[i].size() == 1) {
          sig[i] = slots[i].front();
        } else {
          DerivedDomain dd;
          dd.kind = DerivedDomain::Kind::Union;
          dd.parts = slots[i];
          sig[i] = ensure_derived(schema, std::move(dd), union_domain_name(slots[i]));
        }
      }
      if (!complete) continue;
      auto it = schema.predicates.find(pred);
      if (it == schema.predicates.end() || it->second != sig) {
        schema.predicates[pred] = sig;
        schema.idb_predicates.insert(pred);
        changed = true;
      }
    }
    if (!changed) break;
  }

  if (diags) {
    for (const auto& [name, dd] : schema.derived_domains) {
      if (dd.kind != DerivedDomain::Kind::Intersection) continue;
      bool any_int = false, any_str = false;
      for (const auto& part : dd.parts)
        (schema.is_int_domain(part) ? any_int : any_str) = true;
      if (any_int && any_str)
        diags->push_back(warning_at(
            -1, "intersection domain '" + name +
                    "' mixes integer and string domains and is always empty"));
    }
  }
  return schema;
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

namespace {

class Normalizer {
 public:
  Normalizer(const Program& p, Schema& schema) : schema_(schema) { program_ = p; }

  Program run() {
    rewrite_partitions();
    hoist_constants();
    merge_standard_rules();
    split_multi_domain_vars();
    normalize_constraints();
    return std::move(program_);
  }

 private:
  void rewrite_partitions() {
    std::vector<Rule> out;
    for (auto& r : program_.rules) {
      if (r.kind != RuleKind::Partition) {
        out.push_back(std::move(r));
        continue;
      }
      bool same_pred = true;
      for (const auto& h : r.head) same_pred = same_pred && h.pred == r.head.front().pred;
      if (same_pred) {
        DerivedDomain dd;
        dd.kind = DerivedDomain::Kind::Enumeration;
        for (const auto& h : r.head) dd.constants.push_back(h.args.back().value);
        std::string dom = ensure_derived(schema_, std::move(dd),
                                         partition_label_domain_name(r.head.front().pred));
        out.push_back(to_generalized(r, r.head.front().pred, dom, /*project=*/false, &out));
      } else if (r.head.size() == 2) {
        // Binary form: a subset plus its complement.
        Rule subset;
        subset.kind = RuleKind::Subset;
        subset.head.push_back(r.head[0]);
        subset.body = r.body;
        out.push_back(std::move(subset));
        Rule complement;
        complement.kind = RuleKind::Standard;
        complement.head.push_back(r.head[1]);
        Conjunction body = r.body.front();
        body.push_back(Literal::negative(r.head[0]));
        complement.body.push_back(std::move(body));
        out.push_back(std::move(complement));
      } else {
        // k >= 3 distinct predicates: one generalized partition over an
        // enumerated label domain plus a projection rule per head.
        std::string sel = r.head.front().pred;
        for (std::size_t i = 1; i < r.head.size(); ++i) sel += "_" + r.head[i].pred;
        sel += "_sel";
        DerivedDomain dd;
        dd.kind = DerivedDomain::Kind::Enumeration;
        for (const auto& h : r.head) dd.constants.push_back(str_const(h.pred));
        std::string dom = ensure_derived(schema_, std::move(dd),
                                         partition_label_domain_name(sel));
        out.push_back(to_generalized(r, sel, dom, /*project=*/true, &out));
      }
    }
    program_.rules = std::move(out);
  }

  Rule to_generalized(const Rule& r, const std::string& pred, const std::string& label_domain,
                      bool project, std::vector<Rule>* out) {
    std::set<std::string> used;
    for (const auto& conj : r.body)
      for (const auto& v : conjunct_vars_in_order(conj)) used.insert(v);
    for (const auto& h : r.head)
      for (const auto& t : h.args)
        if (t.is_var()) used.insert(t.var);
    std::string label = fresh_var(used, "L");

    Rule g;
    g.kind = RuleKind::GeneralizedPartition;
    g.label_var = label;
    Atom head;
    head.pred = pred;
    if (project) {
      head.args = r.head.front().args;
    } else {
      head.args.assign(r.head.front().args.begin(), std::prev(r.head.front().args.end()));
    }
    head.args.push_back(Term::variable(label));
    g.head.push_back(head);
    Conjunction body = r.body.front();
    Atom dom_atom;
    dom_atom.pred = label_domain;
    dom_atom.args.push_back(Term::variable(label));
    body.push_back(Literal::positive(dom_atom));
    g.body.push_back(std::move(body));

    if (project) {
      // pi(X) :- sel(X,L), L = 'pi'. The selector inherits the first head
      // predicate's signature plus the label domain.
      if (schema_.predicates.count(r.head.front().pred)) {
        std::vector<std::string> sig = schema_.predicates.at(r.head.front().pred);
        sig.push_back(label_domain);
        schema_.predicates[pred] = sig;
        schema_.idb_predicates.insert(pred);
      }
      for (const auto& h : r.head) {
        Rule proj;
        proj.kind = RuleKind::Standard;
        proj.head.push_back(h);
        Conjunction pc;
        Atom sel_atom = g.head.front();
        pc.push_back(Literal::positive(sel_atom));
        pc.push_back(Literal::compare(
            Comparison{Expr::variable(label), CompareOp::Eq, Expr::symbol(h.pred)}));
        proj.body.push_back(std::move(pc));
        out->push_back(std::move(proj));
      }
    }
    return g;
  }

  void hoist_constants() {
    for (auto& r : program_.rules) {
      for (std::size_t ci = 0; ci < r.body.size(); ++ci) {
        Conjunction& conj = r.body[ci];
        std::set<std::string> used;
        for (const auto& v : conjunct_vars_in_order(conj)) used.insert(v);
        for (const auto& h : r.head)
          for (const auto& t : h.args)
            if (t.is_var()) used.insert(t.var);

        std::vector<Literal> extra;
        auto hoist_atom = [&](Atom& a, bool is_label_atom) {
          for (auto& t : a.args) {
            if (t.is_var() || is_label_atom) continue;
            std::string v = fresh_var(used, "V");
            extra.push_back(Literal::compare(Comparison{
                Expr::variable(v), CompareOp::Eq,
                std::holds_alternative<std::int64_t>(t.value)
                    ? Expr::integer(std::get<std::int64_t>(t.value))
                    : Expr::symbol(std::get<std::string>(t.value))}));
            t = Term::variable(v);
          }
        };
        for (auto& lit : conj)
          if (lit.kind != Literal::Kind::Compare) hoist_atom(lit.atom, false);
        // Heads of standard rules also lose constants. Repeated head
        // variables are split the same way so that each head position binds
        // a distinct variable.
        if (r.kind == RuleKind::Standard && ci == 0) {
          std::set<std::string> head_seen;
          for (auto& h : r.head) {
            hoist_atom(h, false);
            for (auto& t : h.args) {
              if (!t.is_var()) continue;
              if (head_seen.insert(t.var).second) continue;
              std::string v = fresh_var(used, "V");
              extra.push_back(Literal::compare(
                  Comparison{Expr::variable(v), CompareOp::Eq, Expr::variable(t.var)}));
              t = Term::variable(v);
              head_seen.insert(v);
            }
          }
        }
        for (auto& e : extra) conj.push_back(std::move(e));
      }
    }
  }

  void merge_standard_rules() {
    // Group standard rules by head predicate, preserving first-rule order.
    std::map<std::string, std::vector<int>> groups;
    std::vector<std::string> order;
    for (std::size_t i = 0; i < program_.rules.size(); ++i) {
      const Rule& r = program_.rules[i];
      if (r.kind != RuleKind::Standard) continue;
      auto& g = groups[r.head.front().pred];
      if (g.empty()) order.push_back(r.head.front().pred);
      g.push_back(static_cast<int>(i));
    }

    std::set<int> dropped;
    for (const auto& pred : order) {
      const auto& g = groups[pred];
      if (g.size() < 2) continue;
      Rule& first = program_.rules[g.front()];
      const std::vector<Term>& canon = first.head.front().args;
      std::set<std::string> canon_vars;
      for (const auto& t : canon) canon_vars.insert(t.var);

      for (std::size_t k = 1; k < g.size(); ++k) {
        Rule& other = program_.rules[g[k]];
        for (auto& conj : other.body) {
          std::map<std::string, std::string> rename;
          for (std::size_t i = 0; i < canon.size(); ++i)
            rename[other.head.front().args[i].var] = canon[i].var;
          // Existentials that collide with canonical head variables move out
          // of the way first.
          std::set<std::string> used = canon_vars;
          for (const auto& v : conjunct_vars_in_order(conj)) used.insert(v);
          for (const auto& v : conjunct_vars_in_order(conj)) {
            if (rename.count(v)) continue;
            if (canon_vars.count(v)) rename[v] = fresh_var(used, "V");
          }
          first.body.push_back(rename_conjunct(conj, rename));
        }
        dropped.insert(g[k]);
      }
    }
    if (dropped.empty()) return;
    std::vector<Rule> out;
    for (std::size_t i = 0; i < program_.rules.size(); ++i)
      if (!dropped.count(static_cast<int>(i))) out.push_back(std::move(program_.rules[i]));
    program_.rules = std::move(out);
  }

  void split_multi_domain_vars() {
    for (auto& r : program_.rules) {
      for (auto& conj : r.body) {
        std::set<std::string> used;
        for (const auto& v : conjunct_vars_in_order(conj)) used.insert(v);
        std::map<std::string, std::string> first_domain;
        std::vector<Literal> extra;
        for (auto& lit : conj) {
          if (lit.kind != Literal::Kind::Atom) continue;
          Atom& a = lit.atom;
          std::vector<std::string> sig;
          if (schema_.is_domain(a.pred)) {
            sig.assign(1, a.pred);
          } else if (auto it = schema_.predicates.find(a.pred); it != schema_.predicates.end()) {
            sig = it->second;
          } else {
            continue;
          }
          for (std::size_t i = 0; i < a.args.size() && i < sig.size(); ++i) {
            if (!a.args[i].is_var()) continue;
            const std::string dom = sig[i];
            auto [it2, fresh] = first_domain.emplace(a.args[i].var, dom);
            if (fresh || it2->second == dom) continue;
            std::string v = fresh_var(used, "V");
            extra.push_back(Literal::compare(
                Comparison{Expr::variable(v), CompareOp::Eq, Expr::variable(a.args[i].var)}));
            a.args[i] = Term::variable(v);
            first_domain.emplace(v, dom);
          }
        }
        for (auto& e : extra) conj.push_back(std::move(e));
      }
    }
  }

  void normalize_constraints() {
    for (auto& r : program_.rules) {
      if (r.kind != RuleKind::Constraint || !r.head.empty()) continue;
      Conjunction body;
      for (auto& lit : r.body.front()) {
        if (lit.kind == Literal::Kind::NegAtom)
          r.head.push_back(std::move(lit.atom));
        else
          body.push_back(std::move(lit));
      }
      r.body.front() = std::move(body);
    }
  }

  static Conjunction rename_conjunct(const Conjunction& conj,
                                     const std::map<std::string, std::string>& rename) {
    auto ren = [&](const std::string& v) {
      auto it = rename.find(v);
      return it == rename.end() ? v : it->second;
    };
    std::function<Expr(const Expr&)> ren_expr = [&](const Expr& e) {
      Expr out = e;
      if (e.kind == Expr::Kind::Var) out.var = ren(e.var);
      for (auto& a : out.args) a = ren_expr(a);
      return out;
    };
    Conjunction out;
    for (const auto& lit : conj) {
      Literal l = lit;
      if (l.kind == Literal::Kind::Compare) {
        l.cmp.lhs = ren_expr(l.cmp.lhs);
        l.cmp.rhs = ren_expr(l.cmp.rhs);
      } else {
        for (auto& t : l.atom.args)
          if (t.is_var()) t.var = ren(t.var);
      }
      out.push_back(std::move(l));
    }
    return out;
  }

  static std::string fresh_var(std::set<std::string>& used, const std::string& stem) {
    for (int i = 1;; ++i) {
      std::string v = stem + std::to_string(i);
      if (used.insert(v).second) return v;
    }
  }

  Program program_;
  Schema& schema_;
};

}  // namespace

Program normalize(const Program& p, Schema& schema) { return Normalizer(p, schema).run(); }

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

Classification classify_predicates(const Program& p) {
  Classification cls;
  std::map<std::string, int> definitions;
  for (const auto& r : p.rules) {
    if (r.kind == RuleKind::Constraint) continue;
    for (const auto& h : r.head) definitions[h.pred]++;
    if (r.kind == RuleKind::Subset || r.kind == RuleKind::GeneralizedPartition)
      cls.guess.insert(r.head.front().pred);
    else if (r.kind == RuleKind::Standard)
      cls.standard.insert(r.head.front().pred);
    else
      cls.diagnostics.push_back(error_at(-1, "partition rules must be normalized away before "
                                             "classification"));
  }
  for (const auto& g : cls.guess) {
    if (definitions[g] > 1)
      cls.diagnostics.push_back(
          error_at(-1, "guess predicate '" + g + "' has more than one defining rule"));
    if (cls.standard.count(g))
      cls.diagnostics.push_back(
          error_at(-1, "guess predicate '" + g + "' is also defined by a standard rule"));
  }

  DependencyGraph graph = build_dependency_graph(p);
  for (std::size_t ri = 0; ri < p.rules.size(); ++ri) {
    const Rule& r = p.rules[ri];
    if (r.kind != RuleKind::Subset && r.kind != RuleKind::GeneralizedPartition) continue;
    for (const auto& lit : r.body.front()) {
      if (lit.kind == Literal::Kind::Compare) continue;
      const std::string& q = lit.atom.pred;
      bool bad = cls.guess.count(q) > 0;
      if (!bad)
        for (const auto& dep : dependencies_of(graph, q)) bad = bad || cls.guess.count(dep);
      if (bad)
        cls.diagnostics.push_back(error_at(
            static_cast<int>(ri),
            "the body of the rule defining '" + r.head.front().pred +
                "' depends on guess predicates through '" + q + "'"));
    }
  }
  return cls;
}

ConstrainedMarking mark_constrained(const Program& p, const Classification& cls) {
  ConstrainedMarking m;
  DependencyGraph graph = build_dependency_graph(p);

  for (const auto& s : cls.standard) {
    auto deps = dependencies_of(graph, s);
    for (const auto& g : cls.guess)
      if (deps.count(g)) {
        m.depends_on_guess.insert(s);
        break;
      }
  }

  // Seeds: predicates occurring in constraints, plus the query goal. A plain
  // goal seeds as well so that its defining rules reach the solver.
  std::set<std::string> seeds;
  for (const auto& r : p.rules) {
    if (r.kind != RuleKind::Constraint) continue;
    for (const auto& h : r.head) seeds.insert(h.pred);
    for (const auto& conj : r.body)
      for (const auto& lit : conj)
        if (lit.kind != Literal::Kind::Compare) seeds.insert(lit.atom.pred);
  }
  if (p.goal) seeds.insert(p.goal->atom.pred);

  std::set<std::string> seed_closure = seeds;
  for (const auto& q : seeds)
    for (const auto& dep : dependencies_of(graph, q)) seed_closure.insert(dep);

  for (const auto& s : cls.standard)
    if (m.depends_on_guess.count(s) && seed_closure.count(s)) m.constrained.insert(s);

  // Recursive standard predicates: on a cycle of the dependency graph
  // restricted to standard rules.
  Program standard_only;
  for (const auto& r : p.rules)
    if (r.kind == RuleKind::Standard) standard_only.rules.push_back(r);
  DependencyGraph sg = build_dependency_graph(standard_only);
  std::set<std::string> recursive;
  for (const auto& s : cls.standard)
    if (dependencies_of(sg, s).count(s)) recursive.insert(s);

  for (const auto& s : m.constrained) {
    bool rd = recursive.count(s) > 0;
    if (!rd) {
      for (const auto& dep : dependencies_of(sg, s))
        rd = rd || (recursive.count(dep) && m.constrained.count(dep));
    }
    if (rd) m.recursion_dependent.insert(s);
  }
  return m;
}

ComponentPartition partition_components(const Program& p, const Classification& cls,
                                        const ConstrainedMarking& marking) {
  (void)cls;
  ComponentPartition part;
  std::set<std::string> p3_defined;
  for (const auto& r : p.rules) {
    if (r.kind != RuleKind::Standard) continue;
    const std::string& h = r.head.front().pred;
    if (marking.constrained.count(h) && marking.recursion_dependent.count(h))
      p3_defined.insert(h);
  }

  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    const Rule& r = p.rules[i];
    int idx = static_cast<int>(i);
    switch (r.kind) {
      case RuleKind::Subset:
      case RuleKind::GeneralizedPartition:
        part.p2_g.push_back(idx);
        break;
      case RuleKind::Constraint: {
        bool touches_p3 = false;
        for (const auto& h : r.head) touches_p3 |= p3_defined.count(h.pred) > 0;
        for (const auto& conj : r.body)
          for (const auto& lit : conj)
            if (lit.kind != Literal::Kind::Compare)
              touches_p3 |= p3_defined.count(lit.atom.pred) > 0;
        (touches_p3 ? part.p3_c : part.p2_c).push_back(idx);
        break;
      }
      case RuleKind::Standard: {
        const std::string& h = r.head.front().pred;
        if (!marking.depends_on_guess.count(h))
          part.p1.push_back(idx);
        else if (p3_defined.count(h))
          part.p3_s.push_back(idx);
        else if (marking.constrained.count(h))
          part.p2_s.push_back(idx);
        else
          part.p4.push_back(idx);
        break;
      }
      case RuleKind::Partition:
        break;  // unreachable on normalized programs
    }
  }
  return part;
}

// ---------------------------------------------------------------------------
// One-shot analysis
// ---------------------------------------------------------------------------

AnalyzedQuery analyze(const Program& p, const Schema& schema) {
  AnalyzedQuery a;
  a.diagnostics = check_safety(p);
  if (has_errors(a.diagnostics)) return a;

  StratifyResult strat = stratify(p);
  for (auto& d : strat.diagnostics) a.diagnostics.push_back(d);
  if (has_errors(a.diagnostics)) return a;

  a.schema = infer_schemas(p, schema, &a.diagnostics);
  a.program = normalize(p, a.schema);

  // Every body predicate must be known by now: a domain, a declared base
  // predicate, or an IDB predicate with an inferred signature.
  std::set<std::string> idb = idb_preds(a.program);
  for (std::size_t ri = 0; ri < a.program.rules.size(); ++ri) {
    for (const auto& conj : a.program.rules[ri].body)
      for (const auto& lit : conj) {
        if (lit.kind == Literal::Kind::Compare) continue;
        const std::string& q = lit.atom.pred;
        if (a.schema.is_domain(q) || a.schema.predicates.count(q) || idb.count(q)) continue;
        a.diagnostics.push_back(
            error_at(static_cast<int>(ri), "unknown predicate '" + q + "'"));
      }
  }
  for (const auto& pred : idb)
    if (!a.schema.predicates.count(pred))
      a.diagnostics.push_back(
          error_at(-1, "could not infer a signature for predicate '" + pred + "'"));
  if (has_errors(a.diagnostics)) return a;

  a.classes = classify_predicates(a.program);
  for (auto& d : a.classes.diagnostics) a.diagnostics.push_back(d);

  // Generalized partition labels must range over a domain.
  for (std::size_t ri = 0; ri < a.program.rules.size(); ++ri) {
    const Rule& r = a.program.rules[ri];
    if (r.kind != RuleKind::GeneralizedPartition) continue;
    const std::string& d = r.body.front().back().atom.pred;
    if (!a.schema.is_domain(d))
      a.diagnostics.push_back(error_at(
          static_cast<int>(ri), "partition label atom '" + d + "' is not a database domain"));
  }

  if (p.goal && !idb.count(p.goal->atom.pred))
    a.diagnostics.push_back(
        error_at(-1, "goal predicate '" + p.goal->atom.pred + "' is not defined in the program"));
  if (has_errors(a.diagnostics)) return a;

  a.marking = mark_constrained(a.program, a.classes);
  a.partition = partition_components(a.program, a.classes, a.marking);

  StratifyResult strat2 = stratify(a.program);
  a.strata = std::move(strat2.strata);
  for (auto& d : strat2.diagnostics) a.diagnostics.push_back(d);
  return a;
}

}  // namespace npdl
