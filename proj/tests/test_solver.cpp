#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <tuple>
#include <sstream>

#include "npdl/analysis.hpp"
#include "npdl/ground.hpp"
#include "npdl/optimizer.hpp"
#include "npdl/parser.hpp"
#include "npdl/solver.hpp"
#include "npdl/transpile.hpp"

using namespace npdl;

namespace {

std::string read_corpus(const std::string& name) {
  std::ifstream in(std::filesystem::path(NPDL_CORPUS_DIR) / name);
  REQUIRE_MESSAGE(in.good(), "cannot open corpus file " << name);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Pipeline {
  AnalyzedQuery aq;
  ConstraintModel model;
  Codebook codebook;
  Database db;
  GroundModel gm;
};

Pipeline run_pipeline(const std::string& schema_file, const std::string& program_file,
                      const std::string& facts_file, bool optimized) {
  Pipeline p;
  Schema schema = parse_schema(read_corpus(schema_file));
  p.aq = analyze(parse_program(read_corpus(program_file)), schema);
  REQUIRE(p.aq.ok());
  p.db = parse_database(read_corpus(facts_file), p.aq.schema);
  TranspileResult tr = assemble_model(p.aq);
  REQUIRE(tr.ok());
  p.codebook = tr.codebook;
  p.model = optimized
                ? optimize(tr.model, p.aq.schema, OptimizeOptions::all(), &p.codebook)
                : tr.model;
  p.gm = ground(p.model, p.db, Interpretation{});
  return p;
}

// Brute-force enumeration over the full assignment space.
std::vector<std::vector<int>> brute_force(const GroundModel& g) {
  std::vector<std::vector<int>> out;
  std::vector<int> values(static_cast<std::size_t>(g.total_cells));
  std::function<void(int)> rec = [&](int cell) {
    if (cell == g.total_cells) {
      if (check_solution(g, values)) out.push_back(values);
      return;
    }
    for (int v = g.cell_lo(cell); v <= g.cell_hi(cell); ++v) {
      values[static_cast<std::size_t>(cell)] = v;
      rec(cell + 1);
    }
  };
  if (g.unsat_markers == 0) rec(0);
  return out;
}

}  // namespace

TEST_CASE("ground: optimized min coloring on the 4-node graph") {
  Pipeline p = run_pipeline("coloring.nps", "min_coloring.npd", "graph4_3colors.npf", true);
  // dvar int col[node] (4 cells in 1..3) + used_color[intcolor] (3 bools).
  CHECK(p.gm.total_cells == 7);
  int edge_constraints = 0, iffs = 0;
  for (const auto& c : p.gm.constraints) {
    if (c.rhs < 0) ++edge_constraints;
    if (c.iff) ++iffs;
  }
  CHECK(edge_constraints == 4);  // one per edge fact
  CHECK(iffs == 3);              // one used_color biconditional per color
}

TEST_CASE("ground: model with zero constraints still declares cells") {
  Schema schema = parse_schema("DOMAINS: node.");
  Program prog = parse_program("v(X) <~ node(X). ? v(X).");
  AnalyzedQuery a = analyze(prog, schema);
  REQUIRE(a.ok());
  Database db = parse_database("node(a). node(b).", a.schema);
  TranspileResult tr = assemble_model(a);
  GroundModel g = ground(tr.model, db, Interpretation{});
  CHECK(g.total_cells == 2);
  // The subset support folds away (membership of a bound domain var is
  // always true), leaving an unconstrained guess.
  SolveResult r = solve(g, SolveMode::All);
  CHECK(r.solutions.size() == 4);
}

TEST_CASE("ground: four queens cells and constraints") {
  Pipeline p = run_pipeline("queens.nps", "nqueens.npd", "queens4.npf", true);
  CHECK(p.gm.total_cells == 4);
  for (int c = 0; c < p.gm.total_cells; ++c) {
    CHECK_FALSE(p.gm.cell_is_bool(c));
    CHECK(p.gm.cell_lo(c) == 1);
    CHECK(p.gm.cell_hi(c) == 4);
  }
  CHECK_FALSE(p.gm.constraints.empty());
}

TEST_CASE("solve: triangle 3-coloring has six solutions") {
  Pipeline p = run_pipeline("coloring.nps", "kcoloring.npd", "triangle_3colors.npf", true);
  SolveResult r = solve(p.gm, SolveMode::All);
  CHECK(r.status == SolveStatus::Done);
  CHECK(r.solutions.size() == 6);
  CHECK(brute_force(p.gm).size() == 6);
}

TEST_CASE("solve: unsatisfiable marker yields no solutions") {
  // Triangle with two colors is uncolorable; after full optimization the
  // model still detects it at search time.
  Schema schema = parse_schema(read_corpus("coloring.nps"));
  AnalyzedQuery a = analyze(parse_program(read_corpus("kcoloring.npd")), schema);
  Database db = parse_database(
      "node(a). node(b). node(c). edge(a,b). edge(b,c). edge(a,c). color(red). color(green).",
      a.schema);
  TranspileResult tr = assemble_model(a);
  GroundModel g = ground(tr.model, db, Interpretation{});
  SolveResult r = solve(g, SolveMode::First);
  CHECK(r.status == SolveStatus::Done);
  CHECK(r.solutions.empty());
}

TEST_CASE("solve: min coloring optimum is three") {
  Pipeline p = run_pipeline("coloring.nps", "min_coloring.npd", "graph4_3colors.npf", true);
  SolveResult r = solve(p.gm, SolveMode::Optimize);
  REQUIRE(r.solutions.size() == 1);
  REQUIRE(r.solutions[0].objective.has_value());
  CHECK(*r.solutions[0].objective == 3);

  // Brute-force confirmation over the 3^4 * 2^3 space.
  auto all = brute_force(p.gm);
  std::int64_t best = 1 << 20;
  for (const auto& v : all) {
    std::int64_t obj = 0;
    for (int node : p.gm.objective_nodes) obj += eval_node(p.gm, node, v);
    best = std::min(best, obj);
  }
  CHECK(best == 3);
}

TEST_CASE("solve: All equals brute force within the assignment-space cap") {
  for (const auto& [sf, pf, ff, optimized] :
       std::vector<std::tuple<const char*, const char*, const char*, bool>>{
           {"queens.nps", "nqueens.npd", "queens4.npf", false},
           {"latin.nps", "latin_squares.npd", "latin3.npf", true},
           {"sat.nps", "maxsat.npd", "sat1.npf", false}}) {
    INFO("program ", pf, " optimized=", optimized);
    Pipeline p = run_pipeline(sf, pf, ff, optimized);
    REQUIRE(p.gm.assignment_space() <= 2'000'000u);
    SolveResult r = solve(p.gm, SolveMode::All);
    auto expect = brute_force(p.gm);
    REQUIRE(r.solutions.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(r.solutions[i].values == expect[i]);
  }
}

TEST_CASE("solve: every returned solution passes the independent checker") {
  for (bool optimized : {false, true}) {
    Pipeline p = run_pipeline("queens.nps", "nqueens.npd", "queens4.npf", optimized);
    SolveResult r = solve(p.gm, SolveMode::All);
    CHECK(r.solutions.size() == 2);
    for (const auto& s : r.solutions) CHECK(check_solution(p.gm, s.values));
  }
}

TEST_CASE("solve: determinism of ordering") {
  Pipeline p = run_pipeline("coloring.nps", "kcoloring.npd", "graph4_3colors.npf", true);
  SolveResult a = solve(p.gm, SolveMode::All);
  SolveResult b = solve(p.gm, SolveMode::All);
  REQUIRE(a.solutions.size() == b.solutions.size());
  for (std::size_t i = 0; i < a.solutions.size(); ++i)
    CHECK(a.solutions[i].values == b.solutions[i].values);
}

TEST_CASE("solve: node limit reports a resource limit, not unsat") {
  Pipeline p = run_pipeline("latin.nps", "latin_squares.npd", "latin3.npf", false);
  SolveLimits limits;
  limits.node_limit = 5;
  SolveResult r = solve(p.gm, SolveMode::All, limits);
  CHECK(r.status == SolveStatus::ResourceLimit);
}

TEST_CASE("extract: optimal coloring uses three colors") {
  Pipeline p = run_pipeline("coloring.nps", "min_coloring.npd", "graph4_3colors.npf", true);
  SolveResult r = solve(p.gm, SolveMode::Optimize);
  REQUIRE(r.solutions.size() == 1);
  Atom goal = p.aq.program.goal->atom;
  std::set<Tuple> rel = extract_answer(p.gm, r.solutions[0], goal);
  CHECK(rel.size() == 3);
}

TEST_CASE("extract: all-false goal array is the empty relation") {
  Schema schema = parse_schema("DOMAINS: node.");
  AnalyzedQuery a = analyze(parse_program("v(X) <~ node(X). ? v(X)."), schema);
  Database db = parse_database("node(a). node(b).", a.schema);
  TranspileResult tr = assemble_model(a);
  GroundModel g = ground(tr.model, db, Interpretation{});
  SolveResult r = solve(g, SolveMode::First);
  REQUIRE(r.solutions.size() == 1);
  // Search order assigns 0 first, so the first solution is the empty guess.
  CHECK(extract_answer(g, r.solutions[0], a.program.goal->atom).empty());
}

TEST_CASE("extract: vertex cover witness touches every edge") {
  Pipeline p = run_pipeline("graph.nps", "vertex_cover.npd", "graph4.npf", true);
  SolveResult r = solve(p.gm, SolveMode::First);
  REQUIRE(r.solutions.size() == 1);
  std::set<Tuple> cover = extract_answer(p.gm, r.solutions[0], p.aq.program.goal->atom);
  for (const auto& edge : p.db.facts.at("edge").rows()) {
    bool touched = cover.count({edge[0]}) || cover.count({edge[1]});
    CHECK(touched);
  }
}

TEST_CASE("extract: reduced queen array decodes row/column pairs") {
  Pipeline p = run_pipeline("queens.nps", "nqueens.npd", "queens4.npf", true);
  SolveResult r = solve(p.gm, SolveMode::All);
  REQUIRE(r.solutions.size() == 2);
  for (const auto& s : r.solutions) {
    std::set<Tuple> queens = extract_answer(p.gm, s, p.aq.program.goal->atom);
    CHECK(queens.size() == 4);  // one queen per row
    std::set<Constant> cols;
    for (const auto& t : queens) cols.insert(t[1]);
    CHECK(cols.size() == 4);  // all columns distinct
  }
}

TEST_CASE("known-value arrays fold against the interpretation") {
  // A P1 predicate referenced from P2: its cells are constants at grounding.
  Schema schema = parse_schema("DOMAINS: node. PREDICATES: edge(node,node).");
  Program prog = parse_program(
      "big(X) :- edge(X,Y), edge(Y,Z).\n"
      "v(X) <~ node(X).\n"
      ":- big(X), not v(X).\n"
      "? v(X).");
  AnalyzedQuery a = analyze(prog, schema);
  REQUIRE(a.ok());
  Database db = parse_database("node(a). node(b). node(c). edge(a,b). edge(b,c).", a.schema);
  TranspileResult tr = assemble_model(a);
  REQUIRE(tr.ok());
  bool has_known = false;
  for (const auto& d : tr.model.decls) has_known |= d.kind == MDecl::Kind::KnownArray;
  REQUIRE(has_known);

  Interpretation known;
  known.insert("big", {str_const("a")});
  GroundModel g = ground(tr.model, db, known);
  SolveResult r = solve(g, SolveMode::All);
  // v must contain a; the other two nodes are free: 4 solutions.
  CHECK(r.solutions.size() == 4);
  for (const auto& s : r.solutions) {
    auto rel = extract_answer(g, s, a.program.goal->atom);
    CHECK(rel.count({str_const("a")}) == 1);
  }
}
