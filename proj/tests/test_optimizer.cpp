#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "npdl/analysis.hpp"
#include "npdl/opl.hpp"
#include "npdl/optimizer.hpp"
#include "npdl/parser.hpp"
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

std::string read_golden(const std::string& name) {
  std::ifstream in(std::filesystem::path(NPDL_GOLDEN_DIR) / name);
  REQUIRE_MESSAGE(in.good(), "cannot open golden file " << name);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Built {
  AnalyzedQuery aq;
  TranspileResult tr;
};

Built build(const std::string& schema_file, const std::string& program_file) {
  Built b;
  b.aq = analyze(parse_program(read_corpus(program_file)),
                 parse_schema(read_corpus(schema_file)));
  REQUIRE(b.aq.ok());
  b.tr = assemble_model(b.aq);
  REQUIRE(b.tr.ok());
  return b;
}

}  // namespace

TEST_CASE("range restriction reproduces the intermediate model") {
  Built b = build("coloring.nps", "min_coloring.npd");
  ConstraintModel m = pass_range_restriction(b.tr.model, b.aq.schema);
  CHECK(opl_tokens(emit_opl_model(m)) == opl_tokens(read_golden("min_coloring_range_restricted.opl")));
}

TEST_CASE("range restriction: no membership sums means no change") {
  Built b = build("coloring.nps", "min_coloring.npd");
  ConstraintModel once = pass_range_restriction(b.tr.model, b.aq.schema);
  ConstraintModel twice = pass_range_restriction(once, b.aq.schema);
  CHECK(emit_opl_model(twice) == emit_opl_model(once));
}

TEST_CASE("constraint simplify deletes the tautological support constraint") {
  Built b = build("coloring.nps", "min_coloring.npd");
  ConstraintModel m = pass_range_restriction(b.tr.model, b.aq.schema);
  std::size_t before = m.constraints.size();
  ConstraintModel s = pass_constraint_simplify(m);
  CHECK(s.constraints.size() == before - 1);
  for (const auto& c : s.constraints)
    CHECK(c.origin != MConstraint::Origin::PartitionSupport);
}

TEST_CASE("constraint simplify pushes comparisons into guards") {
  Built b = build("queens.nps", "nqueens.npd");
  ConstraintModel m = pass_constraint_simplify(pass_range_restriction(b.tr.model, b.aq.schema));
  int guarded = 0;
  for (const auto& c : m.constraints)
    if (c.origin == MConstraint::Origin::UserConstraint) {
      CHECK_FALSE(c.guard.empty());
      ++guarded;
    }
  CHECK(guarded == 3);
}

TEST_CASE("constraint simplify is idempotent") {
  for (const auto& [sf, pf] : std::vector<std::pair<const char*, const char*>>{
           {"coloring.nps", "min_coloring.npd"}, {"queens.nps", "nqueens.npd"}}) {
    Built b = build(sf, pf);
    ConstraintModel once = pass_constraint_simplify(b.tr.model);
    ConstraintModel twice = pass_constraint_simplify(once);
    CHECK(emit_opl_model(twice) == emit_opl_model(once));
  }
}

TEST_CASE("full pipeline reproduces the optimized min coloring model") {
  Built b = build("coloring.nps", "min_coloring.npd");
  Codebook cb = b.tr.codebook;
  ConstraintModel m = optimize(b.tr.model, b.aq.schema, OptimizeOptions::all(), &cb);
  CHECK(opl_tokens(emit_opl_model(m)) == opl_tokens(read_golden("min_coloring_optimized.opl")));
  CHECK(cb.arrays.at("col").reduced);
  CHECK(cb.arrays.at("col").label_domain == "color");
  CHECK(cb.coded_domains.at("color") == 1);
  REQUIRE(cb.arrays.at("used_color").dim_is_code.size() == 1);
  CHECK(cb.arrays.at("used_color").dim_is_code[0]);
}

TEST_CASE("array reduction: models without partition arrays are unchanged") {
  Built b = build("graph.nps", "vertex_cover.npd");
  ConstraintModel m = pass_array_reduction(b.tr.model, nullptr);
  CHECK(emit_opl_model(m) == emit_opl_model(b.tr.model));
}

TEST_CASE("array reduction: queens drops the existence constraint") {
  Built b = build("queens.nps", "nqueens.npd");
  ConstraintModel m = pass_array_reduction(b.tr.model, nullptr);
  const MDecl* queen = m.decl("queen");
  REQUIRE(queen != nullptr);
  CHECK(queen->kind == MDecl::Kind::IntArray);
  CHECK(queen->dims == std::vector<std::string>{"intnum"});
  const MDecl* range = m.decl("intnum");
  REQUIRE(range != nullptr);
  CHECK(range->lo == 1);
  for (const auto& c : m.constraints)
    CHECK(c.origin != MConstraint::Origin::PartitionExistence);
}

TEST_CASE("array reduction keeps the zero code when the body reads relations") {
  // Partition body with a base predicate: cells may stay unassigned, so the
  // integer coding needs the 0 value and guarded bindings.
  Schema schema = parse_schema(
      "DOMAINS: node; color. PREDICATES: edge(node,node); special(node).");
  Program p = parse_program(
      "(+)[C] col(X,C) :- special(X), color(C).\n"
      ":- edge(X,Y), col(X,C), col(Y,C).\n"
      "? col(X,C).");
  AnalyzedQuery a = analyze(p, schema);
  REQUIRE(a.ok());
  TranspileResult tr = assemble_model(a);
  ConstraintModel m = pass_array_reduction(tr.model, nullptr);
  const MDecl* range = m.decl("intcolor");
  REQUIRE(range != nullptr);
  CHECK(range->lo == 0);
  bool existence_present = false;
  for (const auto& c : m.constraints)
    existence_present |= c.origin == MConstraint::Origin::PartitionExistence;
  CHECK(existence_present);
}

TEST_CASE("array reduction is idempotent") {
  Built b = build("latin.nps", "latin_squares.npd");
  ConstraintModel once = pass_array_reduction(b.tr.model, nullptr);
  ConstraintModel twice = pass_array_reduction(once, nullptr);
  CHECK(emit_opl_model(twice) == emit_opl_model(once));
}

TEST_CASE("variable deletion: latin row constraint becomes direct equality") {
  Built b = build("latin.nps", "latin_squares.npd");
  ConstraintModel m = optimize(b.tr.model, b.aq.schema, OptimizeOptions::all(), nullptr);
  std::string text = emit_opl_model(m);
  CHECK(text.find("square[r,c1] == square[r,c2]") != std::string::npos);
  CHECK(text.find("square[r1,c] == square[r2,c]") != std::string::npos);
}

TEST_CASE("variable deletion: models without eliminable variables are unchanged") {
  Built b = build("graph.nps", "vertex_cover.npd");
  ConstraintModel m = pass_variable_deletion(b.tr.model);
  CHECK(emit_opl_model(m) == emit_opl_model(b.tr.model));
}

TEST_CASE("variable deletion is idempotent") {
  Built b = build("coloring.nps", "min_coloring.npd");
  ConstraintModel pre = pass_array_reduction(
      pass_constraint_simplify(pass_range_restriction(b.tr.model, b.aq.schema)), nullptr);
  ConstraintModel once = pass_variable_deletion(pre);
  ConstraintModel twice = pass_variable_deletion(once);
  CHECK(emit_opl_model(twice) == emit_opl_model(once));
}

TEST_CASE("variable deletion leaves the zero-based coding alone") {
  Schema schema = parse_schema(
      "DOMAINS: node; color. PREDICATES: edge(node,node); special(node).");
  Program p = parse_program(
      "(+)[C] col(X,C) :- special(X), color(C).\n"
      ":- edge(X,Y), col(X,C), col(Y,C).\n"
      "? col(X,C).");
  AnalyzedQuery a = analyze(p, schema);
  REQUIRE(a.ok());
  TranspileResult tr = assemble_model(a);
  ConstraintModel reduced = pass_array_reduction(tr.model, nullptr);
  ConstraintModel after = pass_variable_deletion(reduced);
  // The 0 code admits "both unassigned"; equating directly would change the
  // meaning, so the pass must not fire here.
  CHECK(emit_opl_model(after) == emit_opl_model(reduced));
}
