#include "npdl/driver.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <random>
#include <stdexcept>

#include "npdl/ground.hpp"
#include "npdl/parser.hpp"
#include "npdl/transpile.hpp"

namespace npdl {

namespace {

std::vector<Rule> rules_at(const Program& p, const std::vector<int>& idx) {
  std::vector<Rule> out;
  for (int i : idx) out.push_back(p.rules[i]);
  return out;
}

// Where the goal predicate is defined, per the component partition.
enum class GoalSite { P1, P2, P3, P4 };

GoalSite goal_site(const AnalyzedQuery& aq, const std::string& goal_pred) {
  if (aq.classes.guess.count(goal_pred)) return GoalSite::P2;
  auto defined_in = [&](const std::vector<int>& idx) {
    for (int i : idx)
      for (const auto& h : aq.program.rules[i].head)
        if (h.pred == goal_pred) return true;
    return false;
  };
  if (defined_in(aq.partition.p2_s)) return GoalSite::P2;
  if (defined_in(aq.partition.p1)) return GoalSite::P1;
  if (defined_in(aq.partition.p3_s)) return GoalSite::P3;
  return GoalSite::P4;
}

// Decodes every decision array of a ground solution into atoms.
Interpretation solution_atoms(const GroundModel& gm, const Solution& s) {
  Interpretation out;
  for (const auto& l : gm.layouts) {
    std::size_t count = l.cell_count();
    for (std::size_t k = 0; k < count; ++k) {
      int value = s.values[static_cast<std::size_t>(l.cell_base) + k];
      if (value == 0 && (l.is_bool || l.lo == 0)) continue;

      std::vector<std::size_t> offs(l.dim_display.size());
      std::size_t rem = k;
      for (std::size_t d = l.dim_display.size(); d-- > 0;) {
        offs[d] = rem % l.dim_display[d].size();
        rem /= l.dim_display[d].size();
      }
      Tuple tuple;
      bool valid = true;
      for (std::size_t d = 0; d < offs.size(); ++d) {
        valid = valid && l.dim_valid[d][offs[d]];
        tuple.push_back(l.dim_display[d][offs[d]]);
      }
      if (!l.is_bool) {
        if (value < 1 || value > static_cast<int>(l.value_decode.size())) continue;
        tuple.push_back(l.value_decode[static_cast<std::size_t>(value - 1)]);
      }
      if (valid) out.insert(l.name, std::move(tuple));
    }
  }
  return out;
}

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

}  // namespace

LoadedQuery load_query(const std::string& schema_text, const std::string& program_text,
                       const std::string& facts_text) {
  LoadedQuery out;
  Schema schema = parse_schema(schema_text);
  Program program = parse_program(program_text);
  out.aq = analyze(program, schema);
  if (!out.aq.ok()) return out;
  out.db = parse_database(facts_text, out.aq.schema);
  return out;
}

RunResult run_query(const AnalyzedQuery& aq, const Database& db, const RunOptions& opts) {
  RunResult res;
  res.diagnostics = aq.diagnostics;
  if (has_errors(res.diagnostics)) return res;
  if (!aq.program.goal) {
    res.diagnostics.push_back(error_at(-1, "the program has no query goal"));
    return res;
  }
  const Goal& goal = *aq.program.goal;
  bool optimized_goal = goal.mode != Goal::Mode::Plain;

  Answer ans;
  Interpretation base = base_interpretation(db);

  // Step 1: the deterministic prelude.
  Interpretation m1 = evaluate_stratified(rules_at(aq.program, aq.partition.p1), base);
  ans.stats.m1_size = m1.size() - base.size();

  bool p2_empty = aq.partition.p2_g.empty() && aq.partition.p2_s.empty();
  bool p3_empty = aq.partition.p3_s.empty() && aq.partition.p3_c.empty();
  GoalSite site = goal_site(aq, goal.atom.pred);

  if (optimized_goal) {
    if (site != GoalSite::P2) {
      res.diagnostics.push_back(error_at(
          -1, "an optimization goal must be defined in the non-deterministic component"));
      return res;
    }
    if (!p3_empty) {
      res.diagnostics.push_back(error_at(
          -1, "optimization across the recursive check layer is not supported"));
      return res;
    }
  }

  if (p2_empty) {
    // Purely deterministic program: the perfect model is the one candidate;
    // constraints may still reject it.
    std::vector<Rule> all_constraints =
        rules_at(aq.program, aq.partition.p2_c);
    for (const auto& r : rules_at(aq.program, aq.partition.p3_c)) all_constraints.push_back(r);
    if (!satisfies_constraints(all_constraints, m1)) {
      ans.kind = Answer::Kind::NoSolution;
      res.answer = ans;
      return res;
    }
    ans.kind = Answer::Kind::Solved;
    ans.answers.push_back(project_goal(m1, goal.atom));
    res.answer = ans;
    return res;
  }

  // Step 2: translate, optimize, ground, and solve the guessed core.
  TranspileResult tr = assemble_model(aq);
  for (const auto& d : tr.diagnostics) res.diagnostics.push_back(d);
  if (has_errors(res.diagnostics)) return res;
  Codebook codebook = tr.codebook;
  ConstraintModel model = optimize(tr.model, aq.schema, opts.opt, &codebook);
  GroundModel gm = ground(model, db, m1);

  auto answer_for = [&](const Solution& s, const Interpretation& full) -> GoalRelation {
    if (site == GoalSite::P2) return extract_answer(gm, s, goal.atom);
    return project_goal(full, goal.atom);
  };

  if (p3_empty) {
    // "the iteration introduced in step 3 is not needed": exactly one solve.
    if (optimized_goal || opts.mode == SolveMode::Optimize) {
      if (!optimized_goal) {
        res.diagnostics.push_back(error_at(-1, "the query goal has no objective to optimize"));
        return res;
      }
      if (opts.mode == SolveMode::All) {
        // One enumeration; the optimal solutions are filtered afterwards.
        SolveResult sr = solve(gm, SolveMode::All, opts.limits);
        ans.stats.solve_calls = 1;
        if (sr.status == SolveStatus::ResourceLimit) {
          ans.kind = Answer::Kind::ResourceLimit;
        } else if (sr.solutions.empty()) {
          ans.kind = Answer::Kind::NoSolution;
        } else {
          ans.kind = Answer::Kind::Solved;
          std::int64_t best = *sr.solutions.front().objective;
          for (const auto& s : sr.solutions)
            best = gm.maximize ? std::max(best, *s.objective) : std::min(best, *s.objective);
          ans.objective = best;
          std::set<GoalRelation> all;
          for (const auto& s : sr.solutions) {
            if (*s.objective != best) continue;
            Interpretation m2 = solution_atoms(gm, s);
            if (ans.stats.m2_size == 0) ans.stats.m2_size = m2.size();
            Interpretation full = m1;
            full.merge(m2);
            all.insert(answer_for(s, full));
          }
          ans.answers.assign(all.begin(), all.end());
        }
        res.answer = ans;
        return res;
      }
      SolveResult sr = solve(gm, SolveMode::Optimize, opts.limits);
      ans.stats.solve_calls = 1;
      if (sr.status == SolveStatus::ResourceLimit) {
        ans.kind = Answer::Kind::ResourceLimit;
      } else if (sr.solutions.empty()) {
        ans.kind = Answer::Kind::NoSolution;
      } else {
        ans.kind = Answer::Kind::Solved;
        ans.objective = sr.solutions[0].objective;
        Interpretation m2 = solution_atoms(gm, sr.solutions[0]);
        ans.stats.m2_size = m2.size();
        Interpretation full = m1;
        full.merge(m2);
        ans.answers.push_back(answer_for(sr.solutions[0], full));
      }
      res.answer = ans;
      return res;
    }

    SolveResult sr = solve(gm, opts.mode, opts.limits);
    ans.stats.solve_calls = 1;
    if (sr.status == SolveStatus::ResourceLimit) {
      ans.kind = Answer::Kind::ResourceLimit;
    } else if (sr.solutions.empty()) {
      ans.kind = Answer::Kind::NoSolution;
    } else {
      ans.kind = Answer::Kind::Solved;
      std::set<GoalRelation> all;
      for (const auto& s : sr.solutions) {
        Interpretation m2 = solution_atoms(gm, s);
        if (ans.stats.m2_size == 0) ans.stats.m2_size = m2.size();
        Interpretation full = m1;
        full.merge(m2);
        all.insert(answer_for(s, full));
      }
      ans.answers.assign(all.begin(), all.end());
    }
    res.answer = ans;
    return res;
  }

  // Step 3: candidate P2 solutions are checked against the recursive layer;
  // a violation requests the next stable-model candidate.
  std::vector<Rule> p3_rules = rules_at(aq.program, aq.partition.p3_s);
  ConstraintModel p3_check = constraints_only_model(aq.program, aq.partition.p3_c, aq.schema);

  std::set<GoalRelation> all;
  bool found = false;
  bool capped = false;
  SolveStatus status = SolveStatus::Done;
  ans.stats.solve_calls = 1;
  solve_enumerate(gm, opts.limits, [&](const Solution& s) {
    Interpretation full = m1;
    Interpretation m2 = solution_atoms(gm, s);
    full.merge(m2);
    Interpretation m3 = evaluate_stratified(p3_rules, full);
    GroundModel check = ground(p3_check, db, m3);
    if (check.unsat_markers > 0) {
      ++ans.stats.p3_iterations;
      capped = opts.candidate_cap >= 0 && ans.stats.p3_iterations >= opts.candidate_cap;
      return !capped;
    }
    found = true;
    ans.stats.m2_size = m2.size();
    ans.stats.m3_size = m3.size() - full.size();

    Interpretation accumulated = m3;
    if (site == GoalSite::P4) {
      // Step 4 runs only when the goal lives in the epilogue.
      accumulated = evaluate_stratified(rules_at(aq.program, aq.partition.p4), accumulated);
    }
    if (site == GoalSite::P2)
      all.insert(extract_answer(gm, s, goal.atom));
    else
      all.insert(project_goal(accumulated, goal.atom));
    return opts.mode == SolveMode::All;  // keep enumerating only under All
  }, &status);

  if (status == SolveStatus::ResourceLimit || (capped && !found)) {
    ans.kind = Answer::Kind::ResourceLimit;
  } else if (!found) {
    ans.kind = Answer::Kind::NoSolution;
  } else {
    ans.kind = Answer::Kind::Solved;
    ans.answers.assign(all.begin(), all.end());
  }
  res.answer = ans;
  return res;
}

// ---------------------------------------------------------------------------
// Instance generation
// ---------------------------------------------------------------------------

namespace {

std::string node_name(int i) { return "n" + std::to_string(i); }

void add_node(Database& db, int i) { db.extents["node"].push_back(str_const(node_name(i))); }

void add_edge(Database& db, int a, int b) {
  db.facts["edge"].insert({str_const(node_name(a)), str_const(node_name(b))});
}

void add_undirected(Database& db, int a, int b) {
  add_edge(db, a, b);
  add_edge(db, b, a);
}

int parse_int_param(const std::string& s, const char* what, int min = 1) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < min)
    throw std::invalid_argument(std::string("invalid ") + what + " '" + s + "'");
  return v;
}

double parse_prob_param(const std::string& s) {
  std::size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size() || v < 0.0 || v > 1.0)
    throw std::invalid_argument("probability must lie in [0,1], got '" + s + "'");
  return v;
}

}  // namespace

Database gen_instance(const std::string& family, const std::vector<std::string>& params) {
  Database db;
  db.extents["node"];
  db.facts["edge"];
  if (family == "chain" || family == "cycle" || family == "complete" ||
      family == "grid-ladder") {
    if (params.size() != 1) throw std::invalid_argument(family + " expects one size parameter");
    int n = parse_int_param(params[0], "size");
    if (family == "chain" || family == "cycle") {
      for (int i = 1; i <= n; ++i) add_node(db, i);
      for (int i = 1; i < n; ++i) add_edge(db, i, i + 1);
      if (family == "cycle" && n > 1) add_edge(db, n, 1);
    } else if (family == "complete") {
      for (int i = 1; i <= n; ++i) add_node(db, i);
      for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) add_undirected(db, i, j);
    } else {
      // Two rails of n nodes plus the rungs between them.
      for (int i = 1; i <= 2 * n; ++i) add_node(db, i);
      for (int i = 1; i < n; ++i) {
        add_undirected(db, i, i + 1);
        add_undirected(db, n + i, n + i + 1);
      }
      for (int i = 1; i <= n; ++i) add_undirected(db, i, n + i);
    }
    return db;
  }
  if (family == "random-gnp") {
    if (params.size() != 3)
      throw std::invalid_argument("random-gnp expects size, probability, and seed");
    int n = parse_int_param(params[0], "size");
    double p = parse_prob_param(params[1]);
    unsigned seed = static_cast<unsigned>(parse_int_param(params[2], "seed", 0));
    for (int i = 1; i <= n; ++i) add_node(db, i);
    std::mt19937 rng(seed);
    // Fixed-point threshold keeps the draw identical across platforms.
    std::uint64_t threshold = static_cast<std::uint64_t>(std::llround(p * 4294967296.0));
    for (int i = 1; i <= n; ++i)
      for (int j = i + 1; j <= n; ++j)
        if (static_cast<std::uint64_t>(rng()) < threshold) add_undirected(db, i, j);
    return db;
  }
  throw std::invalid_argument("unknown instance family '" + family + "'");
}

std::string instance_facts(const Database& db) {
  std::string out;
  for (const auto& [dom, ext] : db.extents)
    for (const auto& c : ext) out += dom + "(" + to_string(c) + ").\n";
  for (const auto& [pred, rel] : db.facts)
    for (const auto& row : rel.rows()) {
      out += pred + "(";
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ",";
        out += to_string(row[i]);
      }
      out += ").\n";
    }
  return out;
}

}  // namespace npdl
