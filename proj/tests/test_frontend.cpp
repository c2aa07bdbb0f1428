#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "npdl/parser.hpp"
#include "npdl/printer.hpp"

using namespace npdl;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  REQUIRE_MESSAGE(in.good(), "cannot open " << p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::filesystem::path> corpus_programs() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(NPDL_CORPUS_DIR))
    if (e.path().extension() == ".npd") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("schema: domains and predicates") {
  Schema s = parse_schema("DOMAINS: node; color. PREDICATES: edge(node,node).");
  CHECK(s.string_domains == std::set<std::string>{"node", "color"});
  CHECK(s.int_domains.empty());
  REQUIRE(s.predicates.count("edge"));
  CHECK(s.predicates.at("edge") == std::vector<std::string>{"node", "node"});
  CHECK_FALSE(s.int_range.has_value());
}

TEST_CASE("schema: empty input") {
  Schema s = parse_schema("");
  CHECK(s.string_domains.empty());
  CHECK(s.int_domains.empty());
  CHECK(s.predicates.empty());
}

TEST_CASE("schema: integer domain and range") {
  Schema s = parse_schema("INT-DOMAINS: num. MinInt=0. MaxInt=10.");
  CHECK(s.int_domains == std::set<std::string>{"num"});
  REQUIRE(s.int_range.has_value());
  CHECK(s.int_range->first == 0);
  CHECK(s.int_range->second == 10);
  CHECK(s.is_int_domain("num"));
  CHECK(s.is_int_domain("integer"));
}

TEST_CASE("schema: errors") {
  CHECK_THROWS_AS(parse_schema("DOMAINS: node; node."), ParseError);
  CHECK_THROWS_AS(parse_schema("PREDICATES: edge(node,node)."), ParseError);
  CHECK_THROWS_AS(parse_schema("FOO: bar."), ParseError);
  CHECK_THROWS_AS(parse_schema("MinInt=3."), ParseError);
  CHECK_THROWS_AS(parse_schema("MinInt=3. MaxInt=1."), ParseError);
  CHECK_THROWS_AS(parse_schema("DOMAINS: a__st1."), ParseError);
}

TEST_CASE("schema: syntax error carries position") {
  try {
    parse_schema("DOMAINS: node\ncolor.");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.pos().line == 2);
  }
}

TEST_CASE("program: subset rule plus constraint") {
  Program p = parse_program("v(X) <~ node(X).  :- edge(X,Y), not v(X), not v(Y).");
  REQUIRE(p.rules.size() == 2);
  CHECK(p.rules[0].kind == RuleKind::Subset);
  CHECK(p.rules[0].head.front().pred == "v");
  CHECK(p.rules[1].kind == RuleKind::Constraint);
  CHECK(p.rules[1].head.empty());
  REQUIRE(p.rules[1].body.size() == 1);
  CHECK(p.rules[1].body.front().size() == 3);
  CHECK(p.rules[1].body.front()[1].kind == Literal::Kind::NegAtom);
}

TEST_CASE("program: ground fact") {
  Program p = parse_program("p.");
  REQUIRE(p.rules.size() == 1);
  CHECK(p.rules[0].kind == RuleKind::Standard);
  CHECK(p.rules[0].head.front().pred == "p");
  CHECK(p.rules[0].head.front().args.empty());
  REQUIRE(p.rules[0].body.size() == 1);
  CHECK(p.rules[0].body.front().empty());
}

TEST_CASE("program: generalized partition") {
  Program p = parse_program("(+)[C] col(X,C) :- node(X), color(C).");
  REQUIRE(p.rules.size() == 1);
  const Rule& r = p.rules[0];
  CHECK(r.kind == RuleKind::GeneralizedPartition);
  CHECK(r.label_var == "C");
  CHECK(r.head.front().pred == "col");
  CHECK(r.body.front().back().atom.pred == "color");
}

TEST_CASE("program: binary partition and constraint sugar") {
  Program p = parse_program("v(X) (+) nv(X) :- node(X). v(X) | v(Y) <- edge(X,Y).");
  REQUIRE(p.rules.size() == 2);
  CHECK(p.rules[0].kind == RuleKind::Partition);
  CHECK(p.rules[0].head.size() == 2);
  // Sugar desugars into a plain constraint with negated head atoms.
  const Rule& c = p.rules[1];
  CHECK(c.kind == RuleKind::Constraint);
  CHECK(c.head.empty());
  REQUIRE(c.body.front().size() == 3);
  CHECK(c.body.front()[1].kind == Literal::Kind::NegAtom);
  CHECK(c.body.front()[1].atom.pred == "v");
}

TEST_CASE("program: partition constant form") {
  Program p = parse_program("assign(X,r) (+) assign(X,g) (+) assign(X,b) :- node(X).");
  REQUIRE(p.rules.size() == 1);
  CHECK(p.rules[0].kind == RuleKind::Partition);
  CHECK(p.rules[0].head.size() == 3);
}

TEST_CASE("program: goals") {
  Program p1 = parse_program("p(X) :- node(X). ? p(X).");
  REQUIRE(p1.goal.has_value());
  CHECK(p1.goal->mode == Goal::Mode::Plain);
  Program p2 = parse_program("p(X) :- node(X). ? min |p(X)|.");
  CHECK(p2.goal->mode == Goal::Mode::Min);
  Program p3 = parse_program("p(X) :- node(X). ? max |p(X)|.");
  CHECK(p3.goal->mode == Goal::Mode::Max);
  CHECK_THROWS_AS(parse_program("? p(X). q(Y) :- node(Y)."), ParseError);
}

TEST_CASE("program: comparisons and arithmetic") {
  Program p = parse_program(":- queen(R1,C1), queen(R2,C2), R1 != R2, R1+C1 = R2+C2.");
  const Conjunction& body = p.rules[0].body.front();
  REQUIRE(body.size() == 4);
  CHECK(body[2].kind == Literal::Kind::Compare);
  CHECK(body[2].cmp.op == CompareOp::Ne);
  CHECK(body[3].cmp.lhs.kind == Expr::Kind::Add);
}

TEST_CASE("program: parse errors") {
  CHECK_THROWS_AS(parse_program("p(X) :- q(X)"), ParseError);              // missing period
  CHECK_THROWS_AS(parse_program("v(X) (+) v(X) :- node(X)."), ParseError); // duplicate head pred
  CHECK_THROWS_AS(parse_program("v(X) (+) w(Y) :- node(X)."), ParseError); // mixed vectors
  CHECK_THROWS_AS(parse_program("v(X) (+) w(a) :- node(X)."), ParseError); // mixed forms
  CHECK_THROWS_AS(parse_program("(+)[C] col(C,X) :- node(X), color(C)."), ParseError);
  CHECK_THROWS_AS(parse_program("(+)[C] col(X,C) :- color(C), node(X)."), ParseError);
  CHECK_THROWS_AS(parse_program("p__st1(X) :- node(X)."), ParseError);     // reserved infix
  CHECK_THROWS_AS(parse_program("p(X) :- not X < 3."), ParseError);        // negated comparison
}

TEST_CASE("database: extents and facts") {
  Schema s = parse_schema("DOMAINS: node. PREDICATES: edge(node,node).");
  Database db = parse_database(
      "node(a). node(b). node(c). node(d). edge(a,b). edge(a,c). edge(b,c). edge(c,d).", s);
  REQUIRE(db.extent("node") != nullptr);
  CHECK(db.extent("node")->size() == 4);
  CHECK(db.facts.at("edge").size() == 4);
  CHECK(db.facts.at("edge").contains({str_const("a"), str_const("b")}));
  CHECK(db.code_of("node", str_const("c")) == 3);
}

TEST_CASE("database: empty input") {
  Schema s = parse_schema("DOMAINS: node. PREDICATES: edge(node,node).");
  Database db = parse_database("", s);
  CHECK(db.extent("node")->empty());
  CHECK(db.facts.at("edge").empty());
}

TEST_CASE("database: integer domain extent") {
  Schema s = parse_schema("INT-DOMAINS: num.");
  Database db = parse_database("num(1), num(2), num(3).", s);
  REQUIRE(db.extent("num") != nullptr);
  CHECK(*db.extent("num") ==
        std::vector<Constant>{int_const(1), int_const(2), int_const(3)});
}

TEST_CASE("database: integer range materialization") {
  Schema s = parse_schema("MinInt=0. MaxInt=10.");
  Database db = parse_database("", s);
  REQUIRE(db.extent("integer") != nullptr);
  CHECK(db.extent("integer")->size() == 11);
  CHECK(db.code_of("integer", int_const(0)) == 1);
}

TEST_CASE("database: errors") {
  Schema s = parse_schema("DOMAINS: node. INT-DOMAINS: num. PREDICATES: edge(node,node).");
  CHECK_THROWS_AS(parse_database("edge(a).", s), ParseError);        // arity
  CHECK_THROWS_AS(parse_database("edge(a,b).", s), ParseError);      // outside extent
  CHECK_THROWS_AS(parse_database("num(a).", s), ParseError);         // non-integer
  CHECK_THROWS_AS(parse_database("node(1).", s), ParseError);        // integer in string domain
  CHECK_THROWS_AS(parse_database("unknown(a).", s), ParseError);     // undeclared
  CHECK_THROWS_AS(parse_database("integer(3).", s), ParseError);     // reserved
}

TEST_CASE("printer: example shapes") {
  Program p = parse_program("v(X) <~ node(X). :- edge(X,Y), not v(X), not v(Y). ? v(X).");
  std::string text = print_program(p);
  CHECK(text == "v(X) <~ node(X).\n:- edge(X,Y), not v(X), not v(Y).\n? v(X).\n");
  CHECK(print_program(Program{}) == "");
}

TEST_CASE("printer: round trip on the corpus") {
  auto files = corpus_programs();
  REQUIRE(files.size() >= 9);
  for (const auto& f : files) {
    INFO("file ", f.string());
    Program p = parse_program(read_file(f));
    std::string once = print_program(p);
    Program q = parse_program(once);
    CHECK(q == p);                        // parse . print is the identity
    CHECK(print_program(q) == once);      // print . parse . print is stable
  }
}

TEST_CASE("printer: disjunctive bodies survive the round trip") {
  Program p = parse_program("f(X) :- p(X,V), s(V) ; n(X,Z), not s(Z).");
  REQUIRE(p.rules.front().body.size() == 2);
  Program q = parse_program(print_program(p));
  CHECK(q == p);
}
