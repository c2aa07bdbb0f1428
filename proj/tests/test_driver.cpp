#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "npdl/driver.hpp"
#include "npdl/parser.hpp"

using namespace npdl;

namespace {

std::string read_corpus(const std::string& name) {
  std::ifstream in(std::filesystem::path(NPDL_CORPUS_DIR) / name);
  REQUIRE_MESSAGE(in.good(), "cannot open corpus file " << name);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunResult run(const std::string& schema, const std::string& program, const std::string& facts,
              RunOptions opts = {}) {
  LoadedQuery q = load_query(read_corpus(schema), read_corpus(program), read_corpus(facts));
  REQUIRE(q.aq.ok());
  return run_query(q.aq, q.db, opts);
}

Tuple t2(const char* a, const char* b) { return {str_const(a), str_const(b)}; }

}  // namespace

TEST_CASE("min coloring answers with three used colors") {
  RunResult r = run("coloring.nps", "min_coloring.npd", "graph4_3colors.npf");
  REQUIRE(r.ok());
  CHECK(r.answer->kind == Answer::Kind::Solved);
  REQUIRE(r.answer->objective.has_value());
  CHECK(*r.answer->objective == 3);
  REQUIRE(r.answer->answers.size() == 1);
  CHECK(r.answer->answers[0].size() == 3);
  CHECK(r.answer->stats.solve_calls == 1);
}

TEST_CASE("P1-only query needs no solving") {
  RunResult r = run("graph.nps", "transitive_closure.npd", "chain4.npf");
  REQUIRE(r.ok());
  CHECK(r.answer->kind == Answer::Kind::Solved);
  REQUIRE(r.answer->answers.size() == 1);
  CHECK(r.answer->answers[0].size() == 6);
  CHECK(r.answer->stats.solve_calls == 0);
}

TEST_CASE("hamiltonian cycle on the 4-cycle returns the cycle") {
  RunResult r = run("ham.nps", "hamiltonian.npd", "ham_cycle4.npf");
  REQUIRE(r.ok());
  CHECK(r.answer->kind == Answer::Kind::Solved);
  REQUIRE(r.answer->answers.size() == 1);
  GoalRelation expect{t2("n1", "n2"), t2("n2", "n3"), t2("n3", "n4"), t2("n4", "n1")};
  CHECK(r.answer->answers[0] == expect);
}

TEST_CASE("hamiltonian cycle on a path has no solution") {
  RunResult r = run("ham.nps", "hamiltonian.npd", "ham_path4.npf");
  REQUIRE(r.ok());
  CHECK(r.answer->kind == Answer::Kind::NoSolution);
}

TEST_CASE("two disjoint cycles fail the reachability check after one candidate") {
  RunResult r = run("ham.nps", "hamiltonian.npd", "ham_two_cycles.npf");
  REQUIRE(r.ok());
  CHECK(r.answer->kind == Answer::Kind::NoSolution);
  CHECK(r.answer->stats.p3_iterations == 1);
}

TEST_CASE("mixed graph iterates past the disconnected candidate") {
  RunResult r = run("ham.nps", "hamiltonian.npd", "ham_mixed.npf");
  REQUIRE(r.ok());
  CHECK(r.answer->kind == Answer::Kind::Solved);
  GoalRelation expect{t2("n1", "n2"), t2("n2", "n3"), t2("n3", "n4"), t2("n4", "n1")};
  CHECK(r.answer->answers[0] == expect);
}

TEST_CASE("candidate cap reports a resource limit, not unsatisfiability") {
  RunOptions opts;
  opts.candidate_cap = 1;
  RunResult r = run("ham.nps", "hamiltonian.npd", "ham_two_cycles.npf", opts);
  REQUIRE(r.ok());
  CHECK(r.answer->kind == Answer::Kind::ResourceLimit);
}

TEST_CASE("a generous candidate cap still finds the answer") {
  RunOptions opts;
  opts.candidate_cap = 50;
  RunResult r = run("ham.nps", "hamiltonian.npd", "ham_mixed.npf", opts);
  REQUIRE(r.ok());
  CHECK(r.answer->kind == Answer::Kind::Solved);
}

TEST_CASE("zero-arity guesses solve as scalar cells") {
  Schema schema = parse_schema("DOMAINS: node.");
  Program p = parse_program(
      "any(X) :- node(X). flag <~ any(V). :- node(X), not flag. ? flag.");
  AnalyzedQuery aq = analyze(p, schema);
  REQUIRE(aq.ok());
  Database db = parse_database("node(a).", aq.schema);
  RunOptions opts;
  opts.mode = SolveMode::All;
  RunResult r = run_query(aq, db, opts);
  REQUIRE(r.ok());
  CHECK(r.answer->kind == Answer::Kind::Solved);
  REQUIRE(r.answer->answers.size() == 1);
  CHECK(r.answer->answers[0] == GoalRelation{Tuple{}});
}

TEST_CASE("all-mode answers are deduplicated goal relations") {
  RunOptions opts;
  opts.mode = SolveMode::All;
  RunResult r = run("queens.nps", "nqueens.npd", "queens4.npf", opts);
  REQUIRE(r.ok());
  CHECK(r.answer->answers.size() == 2);
}

TEST_CASE("optimization goals outside P2 are rejected") {
  Schema schema = parse_schema(read_corpus("graph.nps"));
  Program p = parse_program("tc(X,Y) :- edge(X,Y). tc(X,Y) :- edge(X,Z), tc(Z,Y). ? min |tc(X,Y)|.");
  AnalyzedQuery aq = analyze(p, schema);
  REQUIRE(aq.ok());
  Database db = parse_database(read_corpus("chain4.npf"), aq.schema);
  RunResult r = run_query(aq, db);
  CHECK_FALSE(r.ok());
  CHECK(has_errors(r.diagnostics));
}

TEST_CASE("optimization across the recursive layer is rejected") {
  Schema schema = parse_schema(read_corpus("ham.nps"));
  std::string text = read_corpus("hamiltonian.npd");
  text.replace(text.find("? e(X,Y)."), 10, "? min |e(X,Y)|.");
  Program p = parse_program(text);
  AnalyzedQuery aq = analyze(p, schema);
  REQUIRE(aq.ok());
  Database db = parse_database(read_corpus("ham_cycle4.npf"), aq.schema);
  RunResult r = run_query(aq, db);
  CHECK_FALSE(r.ok());
}

TEST_CASE("deterministic programs can still violate constraints") {
  Schema schema = parse_schema(read_corpus("graph.nps"));
  Program p = parse_program(
      "tc(X,Y) :- edge(X,Y). tc(X,Y) :- edge(X,Z), tc(Z,Y). :- tc(X,X). ? tc(X,Y).");
  AnalyzedQuery aq = analyze(p, schema);
  REQUIRE(aq.ok());
  // A cycle graph closes tc over the diagonal, violating the constraint.
  Database cyc = parse_database(
      "node(a). node(b). edge(a,b). edge(b,a).", aq.schema);
  RunResult r1 = run_query(aq, cyc);
  REQUIRE(r1.ok());
  CHECK(r1.answer->kind == Answer::Kind::NoSolution);

  Database chain = parse_database(read_corpus("chain4.npf"), aq.schema);
  RunResult r2 = run_query(aq, chain);
  REQUIRE(r2.ok());
  CHECK(r2.answer->kind == Answer::Kind::Solved);
}

TEST_CASE("no-solution differs from an empty goal relation") {
  Schema schema = parse_schema(read_corpus("graph.nps"));
  Program p = parse_program(read_corpus("vertex_cover.npd"));
  AnalyzedQuery aq = analyze(p, schema);
  Database db = parse_database("node(a). node(b).", aq.schema);  // no edges
  RunResult r = run_query(aq, db);
  REQUIRE(r.ok());
  CHECK(r.answer->kind == Answer::Kind::Solved);
  REQUIRE(r.answer->answers.size() == 1);
  CHECK(r.answer->answers[0].empty());  // the empty cover is a valid answer
}

TEST_CASE("end-to-end agreement with the direct oracle") {
  struct Case {
    const char* schema;
    const char* program;
    const char* facts;
  };
  for (const Case& c : {Case{"graph.nps", "vertex_cover.npd", "graph4.npf"},
                        Case{"coloring.nps", "kcoloring.npd", "triangle_3colors.npf"},
                        Case{"graph.nps", "dominating_set_min.npd", "graph4.npf"},
                        Case{"graph.nps", "edge_dominating_set.npd", "graph4.npf"},
                        Case{"sat.nps", "maxsat.npd", "sat1.npf"}}) {
    INFO("program ", c.program);
    LoadedQuery q =
        load_query(read_corpus(c.schema), read_corpus(c.program), read_corpus(c.facts));
    REQUIRE(q.aq.ok());
    Program original = parse_program(read_corpus(c.program));
    OracleAnswer oracle = oracle_answer_direct(original, q.db);
    REQUIRE_FALSE(oracle.bound_exceeded);

    RunOptions opts;
    opts.mode = SolveMode::All;
    RunResult r = run_query(q.aq, q.db, opts);
    REQUIRE(r.ok());
    if (oracle.answers.empty()) {
      CHECK(r.answer->kind == Answer::Kind::NoSolution);
      continue;
    }
    CHECK(r.answer->kind == Answer::Kind::Solved);
    std::set<GoalRelation> got(r.answer->answers.begin(), r.answer->answers.end());
    CHECK(got == oracle.answers);
    if (q.aq.program.goal->mode != Goal::Mode::Plain) {
      REQUIRE(r.answer->objective.has_value());
      CHECK(static_cast<std::size_t>(*r.answer->objective) == *oracle.optimal_cardinality);
    }
  }
}

TEST_CASE("gen: chain and complete shapes") {
  Database chain = gen_instance("chain", {"4"});
  CHECK(chain.extents.at("node").size() == 4);
  CHECK(chain.facts.at("edge").size() == 3);

  Database complete = gen_instance("complete", {"3"});
  CHECK(complete.facts.at("edge").size() == 6);  // three undirected edges
  CHECK(complete.facts.at("edge").contains(t2("n1", "n2")));
  CHECK(complete.facts.at("edge").contains(t2("n2", "n1")));

  Database cycle = gen_instance("cycle", {"4"});
  CHECK(cycle.facts.at("edge").size() == 4);

  Database ladder = gen_instance("grid-ladder", {"3"});
  CHECK(ladder.extents.at("node").size() == 6);
  CHECK(ladder.facts.at("edge").size() == 14);  // 2*(2+2+3) symmetric pairs
}

TEST_CASE("gen: random instances are reproducible") {
  Database a = gen_instance("random-gnp", {"6", "0.5", "7"});
  Database b = gen_instance("random-gnp", {"6", "0.5", "7"});
  CHECK(instance_facts(a) == instance_facts(b));
  CHECK(a.facts.at("edge").rows() == b.facts.at("edge").rows());
}

TEST_CASE("gen: invalid parameters throw") {
  CHECK_THROWS_AS(gen_instance("chain", {"0"}), std::invalid_argument);
  CHECK_THROWS_AS(gen_instance("random-gnp", {"5", "1.5", "7"}), std::invalid_argument);
  CHECK_THROWS_AS(gen_instance("random-gnp", {"5", "0.5"}), std::invalid_argument);
  CHECK_THROWS_AS(gen_instance("mystery", {"3"}), std::invalid_argument);
}

TEST_CASE("generated chain feeds the pipeline") {
  Database db = gen_instance("chain", {"4"});
  Schema schema = parse_schema(read_corpus("graph.nps"));
  AnalyzedQuery aq = analyze(parse_program(read_corpus("transitive_closure.npd")), schema);
  REQUIRE(aq.ok());
  RunResult r = run_query(aq, db);
  REQUIRE(r.ok());
  CHECK(r.answer->answers[0].size() == 6);
}

TEST_CASE("a P1 goal still verifies that the guessed core is satisfiable") {
  Schema schema = parse_schema(read_corpus("coloring.nps"));
  // Goal tc lives in P1; the coloring core must still admit a model.
  Program p = parse_program(
      "tc(X,Y) :- edge(X,Y). tc(X,Y) :- edge(X,Z), tc(Z,Y).\n"
      "(+)[C] col(X,C) :- node(X), color(C).\n"
      ":- edge(X,Y), col(X,C), col(Y,C).\n"
      "? tc(X,Y).");
  AnalyzedQuery aq = analyze(p, schema);
  REQUIRE(aq.ok());

  Database colorable = parse_database(
      "node(a). node(b). node(c). edge(a,b). edge(b,c). color(red). color(green).", aq.schema);
  RunResult r1 = run_query(aq, colorable);
  REQUIRE(r1.ok());
  CHECK(r1.answer->kind == Answer::Kind::Solved);
  CHECK(r1.answer->answers[0].size() == 3);  // (a,b),(b,c),(a,c)
  CHECK(r1.answer->stats.solve_calls == 1);

  // A triangle is not 2-colorable: the same P1 goal now has no answer.
  Database triangle = parse_database(
      "node(a). node(b). node(c). edge(a,b). edge(b,c). edge(a,c). color(red). color(green).",
      aq.schema);
  RunResult r2 = run_query(aq, triangle);
  REQUIRE(r2.ok());
  CHECK(r2.answer->kind == Answer::Kind::NoSolution);
}

TEST_CASE("explicit binary partition solves like the subset formulation") {
  LoadedQuery part = load_query(read_corpus("graph.nps"),
                                read_corpus("vertex_cover_partition.npd"),
                                read_corpus("graph4.npf"));
  REQUIRE(part.aq.ok());
  // The complement predicate is guess-dependent but unconstrained: P4.
  CHECK(part.aq.partition.p4.size() == 1);

  RunOptions opts;
  opts.mode = SolveMode::All;
  RunResult r = run_query(part.aq, part.db, opts);
  REQUIRE(r.ok());

  LoadedQuery subset = load_query(read_corpus("graph.nps"), read_corpus("vertex_cover.npd"),
                                  read_corpus("graph4.npf"));
  RunResult expect = run_query(subset.aq, subset.db, opts);
  REQUIRE(expect.ok());
  CHECK(r.answer->answers == expect.answer->answers);

  Program original = parse_program(read_corpus("vertex_cover_partition.npd"));
  OracleAnswer oracle = oracle_answer_direct(original, part.db);
  std::set<GoalRelation> got(r.answer->answers.begin(), r.answer->answers.end());
  CHECK(got == oracle.answers);
}

TEST_CASE("union domains ground and solve end to end") {
  Schema schema = parse_schema("DOMAINS: node; color.");
  Program p = parse_program(
      "item(X) :- node(X).\n"
      "item(X) :- color(X).\n"
      "pick(X) <~ item(X).\n"
      ":- pick(X), pick(Y), X != Y.\n"
      "? pick(X).");
  AnalyzedQuery aq = analyze(p, schema);
  REQUIRE(aq.ok());
  Database db = parse_database("node(a). node(b). color(red).", aq.schema);
  REQUIRE(db.extent("node_or_color") != nullptr);
  CHECK(db.extent("node_or_color")->size() == 3);

  RunOptions opts;
  opts.mode = SolveMode::All;
  RunResult r = run_query(aq, db, opts);
  REQUIRE(r.ok());
  // Empty pick or any singleton: four answers.
  CHECK(r.answer->answers.size() == 4);
}

TEST_CASE("all mode on an optimization query makes a single solver call") {
  RunOptions opts;
  opts.mode = SolveMode::All;
  RunResult r = run("coloring.nps", "min_coloring.npd", "graph4_3colors.npf", opts);
  REQUIRE(r.ok());
  CHECK(r.answer->stats.solve_calls == 1);
  REQUIRE(r.answer->objective.has_value());
  CHECK(*r.answer->objective == 3);
}
