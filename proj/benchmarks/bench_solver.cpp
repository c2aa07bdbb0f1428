#include <benchmark/benchmark.h>

#include "npdl/analysis.hpp"
#include "npdl/driver.hpp"
#include "npdl/ground.hpp"
#include "npdl/optimizer.hpp"
#include "npdl/parser.hpp"
#include "npdl/solver.hpp"
#include "npdl/transpile.hpp"

namespace {

const char* kQueens =
    "(+)[C] queen(R,C) :- num(R), num(C).\n"
    ":- queen(R1,C), queen(R2,C), R1 != R2.\n"
    ":- queen(R1,C1), queen(R2,C2), R1 != R2, R1+C1 = R2+C2.\n"
    ":- queen(R1,C1), queen(R2,C2), R1 != R2, R1-C1 = R2-C2.\n"
    "? queen(R,C).";

npdl::GroundModel queens_model(int n, npdl::AnalyzedQuery& aq_out, npdl::Database& db_out) {
  aq_out = npdl::analyze(npdl::parse_program(kQueens), npdl::parse_schema("INT-DOMAINS: num."));
  std::string facts;
  for (int i = 1; i <= n; ++i) facts += "num(" + std::to_string(i) + ").\n";
  db_out = npdl::parse_database(facts, aq_out.schema);
  npdl::TranspileResult tr = npdl::assemble_model(aq_out);
  npdl::Codebook cb = tr.codebook;
  auto model = npdl::optimize(tr.model, aq_out.schema, npdl::OptimizeOptions::all(), &cb);
  return npdl::ground(model, db_out, npdl::Interpretation{});
}

void BM_queens_first(benchmark::State& state) {
  npdl::AnalyzedQuery aq;
  npdl::Database db;
  npdl::GroundModel gm = queens_model(static_cast<int>(state.range(0)), aq, db);
  for (auto _ : state) {
    auto res = npdl::solve(gm, npdl::SolveMode::First);
    benchmark::DoNotOptimize(res.solutions.size());
  }
}
BENCHMARK(BM_queens_first)->Arg(6)->Arg(8);

void BM_queens_all(benchmark::State& state) {
  npdl::AnalyzedQuery aq;
  npdl::Database db;
  npdl::GroundModel gm = queens_model(static_cast<int>(state.range(0)), aq, db);
  for (auto _ : state) {
    auto res = npdl::solve(gm, npdl::SolveMode::All);
    benchmark::DoNotOptimize(res.solutions.size());
  }
}
BENCHMARK(BM_queens_all)->Arg(5)->Arg(6);

}  // namespace

BENCHMARK_MAIN();
