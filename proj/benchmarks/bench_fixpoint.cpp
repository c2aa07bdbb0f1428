#include <benchmark/benchmark.h>

#include "npdl/driver.hpp"
#include "npdl/fixpoint.hpp"
#include "npdl/parser.hpp"

namespace {

const char* kSchema = "DOMAINS: node. PREDICATES: edge(node,node).";
const char* kClosure =
    "tc(X,Y) :- edge(X,Y).\n"
    "tc(X,Y) :- edge(X,Z), tc(Z,Y).\n"
    "? tc(X,Y).";

void BM_transitive_closure_chain(benchmark::State& state) {
  npdl::Schema schema = npdl::parse_schema(kSchema);
  npdl::Program program = npdl::parse_program(kClosure);
  npdl::Database db = npdl::gen_instance("chain", {std::to_string(state.range(0))});
  npdl::Interpretation base = npdl::base_interpretation(db);
  for (auto _ : state) {
    auto model = npdl::evaluate_stratified(program.rules, base);
    benchmark::DoNotOptimize(model.size());
  }
}
BENCHMARK(BM_transitive_closure_chain)->Arg(16)->Arg(32)->Arg(64);

void BM_transitive_closure_ladder(benchmark::State& state) {
  npdl::Schema schema = npdl::parse_schema(kSchema);
  npdl::Program program = npdl::parse_program(kClosure);
  npdl::Database db = npdl::gen_instance("grid-ladder", {std::to_string(state.range(0))});
  npdl::Interpretation base = npdl::base_interpretation(db);
  for (auto _ : state) {
    auto model = npdl::evaluate_stratified(program.rules, base);
    benchmark::DoNotOptimize(model.size());
  }
}
BENCHMARK(BM_transitive_closure_ladder)->Arg(8)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
