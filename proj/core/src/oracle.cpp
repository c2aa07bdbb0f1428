#include "npdl/oracle.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

#include "npdl/analysis.hpp"

namespace npdl {

// ---------------------------------------------------------------------------
// st transform
// ---------------------------------------------------------------------------

namespace {

std::string fresh_pred(const std::string& stem, int& counter) {
  return stem + kFreshMarker + std::to_string(++counter);
}

std::string fresh_var_name(const Rule& r, const std::string& stem) {
  std::set<std::string> used;
  for (const auto& h : r.head)
    for (const auto& t : h.args)
      if (t.is_var()) used.insert(t.var);
  for (const auto& conj : r.body)
    for (const auto& lit : conj) {
      if (lit.kind == Literal::Kind::Compare) {
        std::vector<std::string> vs;
        collect_vars(lit.cmp.lhs, vs);
        collect_vars(lit.cmp.rhs, vs);
        for (auto& v : vs) used.insert(v);
      } else {
        for (const auto& t : lit.atom.args)
          if (t.is_var()) used.insert(t.var);
      }
    }
  for (int i = 0;; ++i) {
    std::string v = i == 0 ? stem : stem + std::to_string(i);
    if (!used.count(v)) return v;
  }
}

Rule standard_rule(Atom head, Conjunction body) {
  Rule r;
  r.kind = RuleKind::Standard;
  r.head.push_back(std::move(head));
  r.body.push_back(std::move(body));
  return r;
}

}  // namespace

std::vector<Rule> st_transform(const Program& p) {
  std::vector<Rule> out;
  int counter = 0;
  for (const auto& r : p.rules) {
    switch (r.kind) {
      case RuleKind::Standard:
        out.push_back(r);
        break;
      case RuleKind::Partition: {
        // One guarded rule per head atom; the pairwise constraints of the
        // general transform are unnecessary here because guess predicates
        // have a unique defining rule.
        for (std::size_t j = 0; j < r.head.size(); ++j) {
          Conjunction body = r.body.front();
          for (std::size_t i = 0; i < r.head.size(); ++i)
            if (i != j) body.push_back(Literal::negative(r.head[i]));
          out.push_back(standard_rule(r.head[j], std::move(body)));
        }
        break;
      }
      case RuleKind::GeneralizedPartition: {
        const Atom& head = r.head.front();
        std::string diff = fresh_pred("diff_" + head.pred, counter);
        Atom diff_atom;
        diff_atom.pred = diff;
        diff_atom.args = head.args;

        Conjunction body1 = r.body.front();
        body1.push_back(Literal::negative(diff_atom));
        out.push_back(standard_rule(head, std::move(body1)));

        std::string other = fresh_var_name(r, "L_");
        Atom head_other = head;
        head_other.args.back() = Term::variable(other);
        Conjunction body2 = r.body.front();
        body2.push_back(Literal::positive(head_other));
        body2.push_back(Literal::compare(Comparison{
            Expr::variable(other), CompareOp::Ne, Expr::variable(r.label_var)}));
        out.push_back(standard_rule(diff_atom, std::move(body2)));
        break;
      }
      case RuleKind::Subset: {
        // The {0,1}-label special case: a binary partition whose complement
        // predicate is discarded after the transform.
        const Atom& head = r.head.front();
        std::string comp = fresh_pred("not_" + head.pred, counter);
        Atom comp_atom;
        comp_atom.pred = comp;
        comp_atom.args = head.args;

        Conjunction body1 = r.body.front();
        body1.push_back(Literal::negative(comp_atom));
        out.push_back(standard_rule(head, std::move(body1)));

        Conjunction body2 = r.body.front();
        body2.push_back(Literal::negative(head));
        out.push_back(standard_rule(comp_atom, std::move(body2)));
        break;
      }
      case RuleKind::Constraint: {
        Atom marker;
        marker.pred = fresh_pred("c", counter);
        Conjunction body = r.body.front();
        for (const auto& h : r.head) body.push_back(Literal::negative(h));
        body.push_back(Literal::negative(marker));
        out.push_back(standard_rule(marker, std::move(body)));
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reduct-based enumeration
// ---------------------------------------------------------------------------

namespace {

struct GroundRule {
  GroundAtom head;
  std::vector<GroundAtom> pos;
  std::vector<GroundAtom> neg;
  auto operator<=>(const GroundRule&) const = default;
};

Interpretation possible_atoms(const std::vector<Rule>& rules, const Interpretation& base) {
  Interpretation cur = base;
  MatchOptions opts;
  opts.ignore_negatives = true;
  for (;;) {
    bool added = false;
    for (const auto& r : rules) {
      if (r.kind != RuleKind::Standard) continue;
      for (const auto& conj : r.body) {
        match_conjunction(conj, cur, {}, opts, [&](const Bindings& env) {
          Tuple t;
          for (const auto& arg : r.head.front().args)
            t.push_back(arg.is_var() ? env.at(arg.var) : arg.value);
          added |= cur.insert(r.head.front().pred, std::move(t));
          return true;
        });
      }
    }
    if (!added) break;
  }
  return cur;
}

std::set<GroundRule> ground_rules(const std::vector<Rule>& rules, const Interpretation& universe) {
  std::set<GroundRule> out;
  MatchOptions opts;
  opts.ignore_negatives = true;
  for (const auto& r : rules) {
    if (r.kind != RuleKind::Standard) continue;
    for (const auto& conj : r.body) {
      match_conjunction(conj, universe, {}, opts, [&](const Bindings& env) {
        GroundRule g;
        Tuple t;
        for (const auto& arg : r.head.front().args)
          t.push_back(arg.is_var() ? env.at(arg.var) : arg.value);
        g.head = GroundAtom{r.head.front().pred, std::move(t)};
        for (const auto& lit : conj) {
          if (lit.kind == Literal::Kind::Compare) continue;
          Tuple a;
          for (const auto& arg : lit.atom.args)
            a.push_back(arg.is_var() ? env.at(arg.var) : arg.value);
          GroundAtom atom{lit.atom.pred, std::move(a)};
          (lit.kind == Literal::Kind::Atom ? g.pos : g.neg).push_back(std::move(atom));
        }
        out.insert(std::move(g));
        return true;
      });
    }
  }
  return out;
}

// Positive-program least model from the database facts.
Interpretation minimal_model(const std::vector<const GroundRule*>& reduct,
                             const Interpretation& base) {
  Interpretation cur = base;
  for (;;) {
    bool added = false;
    for (const GroundRule* g : reduct) {
      bool fire = true;
      for (const auto& a : g->pos) fire = fire && cur.contains(a.pred, a.args);
      if (fire) added |= cur.insert(g->head.pred, g->head.args);
    }
    if (!added) break;
  }
  return cur;
}

// Predicate-level feedback selection: removes predicates until no negative
// edge remains inside a dependency cycle of the remaining graph.
std::set<std::string> feedback_predicates(const std::set<GroundRule>& rules,
                                          const std::map<std::string, std::size_t>& atom_counts) {
  std::set<std::string> defined;
  for (const auto& g : rules) defined.insert(g.head.pred);

  std::set<std::string> removed;
  for (;;) {
    // reaches[q] = heads reachable from q through remaining defined preds.
    std::map<std::string, std::set<std::string>> direct;
    std::set<std::pair<std::string, std::string>> negative;
    for (const auto& g : rules) {
      if (removed.count(g.head.pred)) continue;
      for (const auto& a : g.pos)
        if (defined.count(a.pred) && !removed.count(a.pred))
          direct[a.pred].insert(g.head.pred);
      for (const auto& a : g.neg)
        if (defined.count(a.pred) && !removed.count(a.pred)) {
          direct[a.pred].insert(g.head.pred);
          negative.insert({a.pred, g.head.pred});
        }
    }
    auto reaches = [&](const std::string& from, const std::string& to) {
      std::set<std::string> seen{from};
      std::vector<std::string> work{from};
      while (!work.empty()) {
        std::string cur = work.back();
        work.pop_back();
        if (cur == to) return true;
        for (const auto& nxt : direct[cur])
          if (seen.insert(nxt).second) work.push_back(nxt);
      }
      return false;
    };

    // Predicates on some negative cycle.
    std::set<std::string> cyclic;
    for (const auto& [q, h] : negative)
      if (h == q || reaches(h, q)) {
        cyclic.insert(q);
        cyclic.insert(h);
      }
    if (cyclic.empty()) break;

    // Prefer user predicates over fresh ones, then fewer candidate atoms,
    // then name order.
    const std::string* pick = nullptr;
    auto better = [&](const std::string& a, const std::string& b) {
      bool fa = a.find(kFreshMarker) != std::string::npos;
      bool fb = b.find(kFreshMarker) != std::string::npos;
      if (fa != fb) return !fa;
      std::size_t ca = atom_counts.count(a) ? atom_counts.at(a) : 0;
      std::size_t cb = atom_counts.count(b) ? atom_counts.at(b) : 0;
      if (ca != cb) return ca < cb;
      return a < b;
    };
    for (const auto& c : cyclic)
      if (!pick || better(c, *pick)) pick = &c;
    removed.insert(*pick);
  }
  return removed;
}

}  // namespace

StableModels enumerate_stable_models(const std::vector<Rule>& rules, const Database& db,
                                     const OracleOptions& opts) {
  StableModels out;
  Interpretation base = base_interpretation(db);
  Interpretation universe = possible_atoms(rules, base);
  std::set<GroundRule> grules = ground_rules(rules, universe);

  std::set<std::string> defined;
  for (const auto& g : grules) defined.insert(g.head.pred);
  std::map<std::string, std::size_t> atom_counts;
  for (const auto& [pred, rel] : universe.relations())
    if (defined.count(pred)) atom_counts[pred] = rel.size();

  std::set<std::string> feedback = feedback_predicates(grules, atom_counts);

  // Candidate atoms: universe atoms of feedback predicates. Atoms whose
  // every support rule negates the atom itself can never be true in a stable
  // model and are fixed false instead of enumerated.
  std::vector<GroundAtom> candidates;
  for (const auto& pred : feedback) {
    const auto* rel = universe.relation(pred);
    if (!rel) continue;
    for (const auto& t : *rel) {
      GroundAtom atom{pred, t};
      bool self_blocked = true;
      for (const auto& g : grules) {
        if (!(g.head == atom)) continue;
        bool negates_self = false;
        for (const auto& n : g.neg) negates_self = negates_self || n == atom;
        self_blocked = self_blocked && negates_self;
      }
      if (!self_blocked) candidates.push_back(std::move(atom));
    }
  }
  out.enumerated_atoms = candidates.size();
  if (candidates.size() > opts.atom_bound) {
    out.bound_exceeded = true;
    return out;
  }

  // Non-feedback predicates derive deterministically, stratum by stratum.
  std::map<std::string, int> stratum;
  for (const auto& pred : defined)
    if (!feedback.count(pred)) stratum[pred] = 0;
  bool changed = true;
  int cap = static_cast<int>(stratum.size());
  while (changed) {
    changed = false;
    for (const auto& g : grules) {
      auto it = stratum.find(g.head.pred);
      if (it == stratum.end()) continue;
      auto relax = [&](const GroundAtom& a, int delta) {
        auto jt = stratum.find(a.pred);
        if (jt == stratum.end()) return;
        if (it->second < jt->second + delta) {
          it->second = jt->second + delta;
          changed = true;
          if (it->second > cap)
            throw std::logic_error("feedback selection left a negative cycle");
        }
      };
      for (const auto& a : g.pos) relax(a, 0);
      for (const auto& a : g.neg) relax(a, 1);
    }
  }
  int max_stratum = 0;
  for (const auto& [pred, s] : stratum) max_stratum = std::max(max_stratum, s);

  std::vector<const GroundRule*> by_stratum_rules;
  for (const auto& g : grules) by_stratum_rules.push_back(&g);

  std::set<Interpretation> models;
  std::uint64_t combos = candidates.empty() ? 1 : (std::uint64_t{1} << candidates.size());
  for (std::uint64_t mask = 0; mask < combos; ++mask) {
    Interpretation m = base;
    for (std::size_t i = 0; i < candidates.size(); ++i)
      if (mask & (std::uint64_t{1} << i)) m.insert(candidates[i].pred, candidates[i].args);

    // Derive the stratified remainder over base + chosen feedback atoms.
    for (int s = 0; s <= max_stratum; ++s) {
      for (;;) {
        bool added = false;
        for (const GroundRule* g : by_stratum_rules) {
          auto it = stratum.find(g->head.pred);
          if (it == stratum.end() || it->second != s) continue;
          bool fire = true;
          for (const auto& a : g->pos) fire = fire && m.contains(a.pred, a.args);
          for (const auto& a : g->neg) fire = fire && !m.contains(a.pred, a.args);
          if (fire) added |= m.insert(g->head.pred, g->head.args);
        }
        if (!added) break;
      }
    }

    // Exact check: m must equal the minimal model of its reduct.
    std::vector<const GroundRule*> reduct;
    for (const auto& g : grules) {
      bool keep = true;
      for (const auto& a : g.neg) keep = keep && !m.contains(a.pred, a.args);
      if (keep) reduct.push_back(&g);
    }
    if (minimal_model(reduct, base) == m) models.insert(std::move(m));
  }
  out.models.assign(models.begin(), models.end());
  return out;
}

// ---------------------------------------------------------------------------
// Answers
// ---------------------------------------------------------------------------

namespace {

GoalRelation project_goal(const Interpretation& m, const Atom& goal) {
  GoalRelation out;
  const auto* rel = m.relation(goal.pred);
  if (!rel) return out;
  for (const auto& t : *rel) {
    if (t.size() != goal.args.size()) continue;
    std::map<std::string, Constant> binding;
    bool match = true;
    for (std::size_t i = 0; i < t.size() && match; ++i) {
      const Term& arg = goal.args[i];
      if (arg.is_var()) {
        auto [it, fresh] = binding.emplace(arg.var, t[i]);
        match = fresh || it->second == t[i];
      } else {
        match = arg.value == t[i];
      }
    }
    if (match) out.insert(t);
  }
  return out;
}

OracleAnswer answers_from_models(const std::vector<Interpretation>& models, const Goal& goal) {
  OracleAnswer out;
  std::set<GoalRelation> all;
  for (const auto& m : models) all.insert(project_goal(m, goal.atom));
  if (goal.mode == Goal::Mode::Plain) {
    out.answers = std::move(all);
    return out;
  }
  if (all.empty()) return out;
  std::size_t best = goal.mode == Goal::Mode::Min ? SIZE_MAX : 0;
  for (const auto& rel : all)
    best = goal.mode == Goal::Mode::Min ? std::min(best, rel.size()) : std::max(best, rel.size());
  for (const auto& rel : all)
    if (rel.size() == best) out.answers.insert(rel);
  out.optimal_cardinality = best;
  return out;
}

}  // namespace

OracleAnswer oracle_answer(const Program& p, const Database& db, const OracleOptions& opts) {
  if (!p.goal) throw std::logic_error("oracle_answer requires a query goal");
  StableModels sm = enumerate_stable_models(st_transform(p), db, opts);
  if (sm.bound_exceeded) {
    OracleAnswer out;
    out.bound_exceeded = true;
    return out;
  }
  return answers_from_models(sm.models, *p.goal);
}

// ---------------------------------------------------------------------------
// Direct guess enumeration
// ---------------------------------------------------------------------------

namespace {

// The candidate extents of one guess rule: for each base tuple either a
// subset membership bit or a label choice.
struct GuessSpace {
  const Rule* rule = nullptr;
  std::vector<Tuple> base;    // projection of the body onto the head vector
  std::vector<Constant> labels;  // empty for subset rules
  bool partition_forms = false;  // form (4)/(5): label selects a head atom

  std::size_t choices() const {
    std::size_t per = labels.empty() ? 2 : labels.size();
    std::size_t n = 1;
    for (std::size_t i = 0; i < base.size(); ++i) {
      n *= per;
      if (n > (std::size_t{1} << 60)) return n;
    }
    return n;
  }
};

}  // namespace

StableModels direct_stable_models(const Program& p, const Database& db,
                                  const OracleOptions& opts) {
  StableModels out;
  Interpretation base = base_interpretation(db);

  std::vector<const Rule*> guess_rules, standard_rules, constraints;
  std::set<std::string> guess_preds;
  for (const auto& r : p.rules) {
    switch (r.kind) {
      case RuleKind::Standard: standard_rules.push_back(&r); break;
      case RuleKind::Constraint: constraints.push_back(&r); break;
      default:
        guess_rules.push_back(&r);
        for (const auto& h : r.head) guess_preds.insert(h.pred);
        break;
    }
  }

  // Standard predicates that do not depend on guesses evaluate first; the
  // guess bodies range over this deterministic prefix.
  DependencyGraph graph = build_dependency_graph(p);
  std::vector<Rule> prefix_rules, suffix_rules;
  for (const Rule* r : standard_rules) {
    auto deps = dependencies_of(graph, r->head.front().pred);
    bool on_guess = false;
    for (const auto& g : guess_preds) on_guess = on_guess || deps.count(g);
    (on_guess ? suffix_rules : prefix_rules).push_back(*r);
  }
  Interpretation m0 = evaluate_stratified(prefix_rules, base);

  // Candidate spaces per guess rule.
  std::vector<GuessSpace> spaces;
  std::size_t total_choices = 1;
  for (const Rule* r : guess_rules) {
    GuessSpace gs;
    gs.rule = r;
    Conjunction body = r->body.front();
    std::size_t head_arity = r->head.front().args.size();
    std::vector<std::string> head_vars;
    if (r->kind == RuleKind::GeneralizedPartition) {
      body.pop_back();  // the label atom ranges separately
      head_arity -= 1;
      for (std::size_t i = 0; i < head_arity; ++i)
        head_vars.push_back(r->head.front().args[i].var);
      const std::string& dom = r->body.front().back().atom.pred;
      if (const auto* rel = m0.relation(dom))
        for (const auto& t : *rel) gs.labels.push_back(t.front());
    } else if (r->kind == RuleKind::Partition) {
      bool constant_form = !r->head.front().args.back().is_var();
      gs.partition_forms = true;
      std::size_t prefix = constant_form ? head_arity - 1 : head_arity;
      for (std::size_t i = 0; i < prefix; ++i)
        head_vars.push_back(r->head.front().args[i].var);
      if (constant_form) {
        for (const auto& h : r->head) gs.labels.push_back(h.args.back().value);
      } else {
        for (const auto& h : r->head) gs.labels.push_back(str_const(h.pred));
      }
    } else {
      for (std::size_t i = 0; i < head_arity; ++i)
        head_vars.push_back(r->head.front().args[i].var);
    }

    std::set<Tuple> proj;
    match_conjunction(body, m0, {}, {}, [&](const Bindings& env) {
      Tuple t;
      for (const auto& v : head_vars) t.push_back(env.at(v));
      proj.insert(std::move(t));
      return true;
    });
    gs.base.assign(proj.begin(), proj.end());
    total_choices *= std::max<std::size_t>(gs.choices(), 1);
    if (total_choices > opts.candidate_bound) {
      out.bound_exceeded = true;
      return out;
    }
    spaces.push_back(std::move(gs));
  }

  std::set<Interpretation> models;
  std::function<void(std::size_t, Interpretation&)> enumerate = [&](std::size_t si,
                                                                    Interpretation& guesses) {
    if (si == spaces.size()) {
      Interpretation m = m0;
      m.merge(guesses);
      m = evaluate_stratified(suffix_rules, m);
      std::vector<Rule> cs;
      for (const Rule* c : constraints) cs.push_back(*c);
      if (satisfies_constraints(cs, m)) models.insert(std::move(m));
      return;
    }
    const GuessSpace& gs = spaces[si];
    std::size_t per = gs.labels.empty() ? 2 : gs.labels.size();
    std::vector<std::size_t> digits(gs.base.size(), 0);
    for (;;) {
      Interpretation saved = guesses;
      for (std::size_t i = 0; i < gs.base.size(); ++i) {
        const Tuple& t = gs.base[i];
        if (gs.labels.empty()) {
          if (digits[i] == 1) guesses.insert(gs.rule->head.front().pred, t);
        } else if (gs.partition_forms) {
          const Atom& chosen = gs.rule->head[digits[i]];
          if (chosen.args.back().is_var()) {
            guesses.insert(chosen.pred, t);
          } else {
            Tuple full = t;
            full.push_back(chosen.args.back().value);
            guesses.insert(chosen.pred, full);
          }
        } else {
          Tuple full = t;
          full.push_back(gs.labels[digits[i]]);
          guesses.insert(gs.rule->head.front().pred, full);
        }
      }
      enumerate(si + 1, guesses);
      guesses = std::move(saved);

      std::size_t d = 0;
      while (d < digits.size() && ++digits[d] == per) digits[d++] = 0;
      if (d == digits.size() && !digits.empty()) break;
      if (digits.empty()) break;
    }
  };
  Interpretation guesses;
  enumerate(0, guesses);
  out.models.assign(models.begin(), models.end());
  return out;
}

OracleAnswer oracle_answer_direct(const Program& p, const Database& db,
                                  const OracleOptions& opts) {
  if (!p.goal) throw std::logic_error("oracle_answer_direct requires a query goal");
  StableModels sm = direct_stable_models(p, db, opts);
  if (sm.bound_exceeded) {
    OracleAnswer out;
    out.bound_exceeded = true;
    return out;
  }
  return answers_from_models(sm.models, *p.goal);
}

}  // namespace npdl
