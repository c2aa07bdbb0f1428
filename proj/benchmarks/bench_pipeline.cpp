#include <benchmark/benchmark.h>

#include "npdl/analysis.hpp"
#include "npdl/ground.hpp"
#include "npdl/optimizer.hpp"
#include "npdl/parser.hpp"
#include "npdl/transpile.hpp"

#include "npdl/driver.hpp"

namespace {

const char* kColoringSchema = "DOMAINS: node; color. PREDICATES: edge(node,node).";
const char* kMinColoring =
    "(+)[C] col(X,C) :- node(X), color(C).\n"
    ":- edge(X,Y), col(X,C), col(Y,C).\n"
    "used_color(C) :- col(X,C).\n"
    "? min |used_color(C)|.";

npdl::Database coloring_db(int n, int colors) {
  npdl::Database db = npdl::gen_instance("grid-ladder", {std::to_string(n)});
  auto& ext = db.extents["color"];
  for (int c = 0; c < colors; ++c) ext.push_back(npdl::str_const("c" + std::to_string(c)));
  return db;
}

void BM_transpile_and_optimize(benchmark::State& state) {
  npdl::AnalyzedQuery aq =
      npdl::analyze(npdl::parse_program(kMinColoring), npdl::parse_schema(kColoringSchema));
  for (auto _ : state) {
    npdl::TranspileResult tr = npdl::assemble_model(aq);
    npdl::Codebook cb = tr.codebook;
    auto model = npdl::optimize(tr.model, aq.schema, npdl::OptimizeOptions::all(), &cb);
    benchmark::DoNotOptimize(model.constraints.size());
  }
}
BENCHMARK(BM_transpile_and_optimize);

void BM_ground_min_coloring(benchmark::State& state) {
  npdl::AnalyzedQuery aq =
      npdl::analyze(npdl::parse_program(kMinColoring), npdl::parse_schema(kColoringSchema));
  npdl::Database db = coloring_db(static_cast<int>(state.range(0)), 4);
  npdl::materialize_domains(aq.schema, db);
  npdl::TranspileResult tr = npdl::assemble_model(aq);
  npdl::Codebook cb = tr.codebook;
  auto model = npdl::optimize(tr.model, aq.schema, npdl::OptimizeOptions::all(), &cb);
  for (auto _ : state) {
    auto gm = npdl::ground(model, db, npdl::Interpretation{});
    benchmark::DoNotOptimize(gm.constraints.size());
  }
}
BENCHMARK(BM_ground_min_coloring)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
