// Command-line front end: solve, check, eval, emit, gen, and the hidden
// oracle subcommand for debugging reference answers.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "npdl/driver.hpp"
#include "npdl/fixpoint.hpp"
#include "npdl/ground.hpp"
#include "npdl/opl.hpp"
#include "npdl/parser.hpp"
#include "npdl/printer.hpp"
#include "npdl/transpile.hpp"

namespace {

constexpr int kExitAnswer = 0;
constexpr int kExitNoSolution = 1;
constexpr int kExitDiagnostics = 2;
constexpr int kExitResourceLimit = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int print_diagnostics(const npdl::Diagnostics& ds) {
  bool errors = false;
  for (const auto& d : ds) {
    bool err = d.severity == npdl::Diagnostic::Severity::Error;
    errors |= err;
    std::cout << (err ? "error" : "warning");
    if (d.rule_index >= 0) std::cout << " (rule " << d.rule_index + 1 << ")";
    std::cout << ": " << d.message << "\n";
  }
  return errors ? kExitDiagnostics : kExitAnswer;
}

npdl::OptimizeOptions parse_opt_flag(const std::string& value) {
  using npdl::OptimizeOptions;
  if (value == "all") return OptimizeOptions::all();
  if (value == "none") return OptimizeOptions::none();
  OptimizeOptions opts = OptimizeOptions::none();
  std::stringstream ss(value);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name == "range-restriction")
      opts.range_restriction = true;
    else if (name == "constraint-simplify")
      opts.constraint_simplify = true;
    else if (name == "array-reduction")
      opts.array_reduction = true;
    else if (name == "variable-deletion")
      opts.variable_deletion = true;
    else
      throw std::runtime_error("unknown optimizer pass '" + name + "'");
  }
  return opts;
}

void print_relation(const std::string& pred, const npdl::GoalRelation& rel) {
  for (const auto& tuple : rel) {
    std::cout << pred;
    if (!tuple.empty()) {
      std::cout << '(';
      for (std::size_t i = 0; i < tuple.size(); ++i) {
        if (i) std::cout << ',';
        std::cout << npdl::to_string(tuple[i]);
      }
      std::cout << ')';
    }
    std::cout << ".\n";
  }
}

struct CommonArgs {
  std::string schema_file, program_file, facts_file;
};

npdl::LoadedQuery load(const CommonArgs& args) {
  return npdl::load_query(read_file(args.schema_file), read_file(args.program_file),
                          args.facts_file.empty() ? "" : read_file(args.facts_file));
}

int cmd_solve(const CommonArgs& args, const std::string& mode, const std::string& opt,
              long long node_limit, double time_limit, long long candidate_cap,
              const std::string& emit_path, bool trace) {
  npdl::LoadedQuery q = load(args);
  if (!q.aq.ok()) return print_diagnostics(q.aq.diagnostics);

  npdl::RunOptions opts;
  opts.opt = parse_opt_flag(opt);
  opts.limits.node_limit = node_limit;
  opts.limits.time_limit_s = time_limit;
  opts.candidate_cap = candidate_cap;
  if (mode == "first")
    opts.mode = npdl::SolveMode::First;
  else if (mode == "all")
    opts.mode = npdl::SolveMode::All;
  else
    opts.mode = npdl::SolveMode::Optimize;

  if (!emit_path.empty()) {
    npdl::TranspileResult tr = npdl::assemble_model(q.aq);
    if (!tr.ok()) return print_diagnostics(tr.diagnostics);
    npdl::Codebook cb = tr.codebook;
    npdl::ConstraintModel model = npdl::optimize(tr.model, q.aq.schema, opts.opt, &cb);
    std::vector<npdl::Rule> p1;
    for (int i : q.aq.partition.p1) p1.push_back(q.aq.program.rules[i]);
    npdl::Interpretation m1 =
        npdl::evaluate_stratified(p1, npdl::base_interpretation(q.db));
    std::ofstream out(emit_path);
    out << npdl::emit_opl(model, q.aq.schema, q.db, &m1);
  }

  npdl::RunResult r = npdl::run_query(q.aq, q.db, opts);
  if (!r.ok()) return print_diagnostics(r.diagnostics);
  const npdl::Answer& ans = *r.answer;
  if (trace) {
    std::cout << "trace: |M1|=" << ans.stats.m1_size << " |M2|=" << ans.stats.m2_size
              << " |M3|=" << ans.stats.m3_size << " iterations=" << ans.stats.p3_iterations
              << " solve_calls=" << ans.stats.solve_calls << "\n";
  }
  switch (ans.kind) {
    case npdl::Answer::Kind::ResourceLimit:
      std::cout << "resource limit reached.\n";
      return kExitResourceLimit;
    case npdl::Answer::Kind::NoSolution:
      std::cout << "no solution.\n";
      return kExitNoSolution;
    case npdl::Answer::Kind::Solved: {
      if (ans.objective) std::cout << "objective " << *ans.objective << "\n";
      const std::string& pred = q.aq.program.goal->atom.pred;
      for (std::size_t i = 0; i < ans.answers.size(); ++i) {
        if (ans.answers.size() > 1) std::cout << "answer " << i + 1 << ":\n";
        print_relation(pred, ans.answers[i]);
      }
      return kExitAnswer;
    }
  }
  return kExitAnswer;
}

int cmd_check(const CommonArgs& args) {
  npdl::LoadedQuery q = load(args);
  int code = print_diagnostics(q.aq.diagnostics);
  if (code != kExitAnswer) return code;
  std::cout << "safety: ok\nstratification: ok\n";

  const npdl::AnalyzedQuery& aq = q.aq;
  auto list = [&](const char* label, const std::vector<int>& idx) {
    std::cout << label << ":";
    if (idx.empty()) {
      std::cout << " (none)\n";
      return;
    }
    std::cout << "\n";
    for (int i : idx) std::cout << "  " << npdl::to_string(aq.program.rules[i]) << "\n";
  };
  auto names = [](const std::set<std::string>& s) {
    std::string out;
    for (const auto& n : s) out += " " + n;
    return out.empty() ? std::string(" (none)") : out;
  };
  std::cout << "guess predicates:" << names(aq.classes.guess) << "\n";
  std::cout << "constrained:" << names(aq.marking.constrained) << "\n";
  std::cout << "recursion-dependent:" << names(aq.marking.recursion_dependent) << "\n";
  list("P1", aq.partition.p1);
  list("P2_G", aq.partition.p2_g);
  list("P2_S", aq.partition.p2_s);
  list("P2_C", aq.partition.p2_c);
  list("P3_S", aq.partition.p3_s);
  list("P3_C", aq.partition.p3_c);
  list("P4", aq.partition.p4);
  return kExitAnswer;
}

int cmd_eval(const CommonArgs& args) {
  npdl::LoadedQuery q = load(args);
  if (!q.aq.ok()) return print_diagnostics(q.aq.diagnostics);
  const npdl::ComponentPartition& part = q.aq.partition;
  if (!part.p2_g.empty() || !part.p2_s.empty() || !part.p2_c.empty() || !part.p3_s.empty() ||
      !part.p3_c.empty() || !part.p4.empty()) {
    std::cout << "error: eval handles purely deterministic programs; use solve\n";
    return kExitDiagnostics;
  }
  npdl::RunResult r = npdl::run_query(q.aq, q.db, {});
  if (!r.ok()) return print_diagnostics(r.diagnostics);
  if (r.answer->kind != npdl::Answer::Kind::Solved) {
    std::cout << "no solution.\n";
    return kExitNoSolution;
  }
  print_relation(q.aq.program.goal->atom.pred, r.answer->answers.front());
  return kExitAnswer;
}

int cmd_emit(const CommonArgs& args, const std::string& opt, const std::string& out_path,
             bool fixp) {
  npdl::LoadedQuery q = load(args);
  if (!q.aq.ok()) return print_diagnostics(q.aq.diagnostics);

  std::string text;
  if (fixp) {
    std::vector<npdl::Rule> rules;
    for (int i : q.aq.partition.p1) rules.push_back(q.aq.program.rules[i]);
    text = npdl::emit_fixp_script(rules, q.aq.schema);
  } else {
    npdl::TranspileResult tr = npdl::assemble_model(q.aq);
    if (!tr.ok()) return print_diagnostics(tr.diagnostics);
    npdl::Codebook cb = tr.codebook;
    npdl::ConstraintModel model = npdl::optimize(tr.model, q.aq.schema, parse_opt_flag(opt), &cb);
    text = npdl::emit_opl(model, q.aq.schema, q.db);
  }
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    out << text;
  }
  return kExitAnswer;
}

int cmd_gen(const std::string& family, const std::vector<std::string>& params,
            const std::string& out_path) {
  npdl::Database db = npdl::gen_instance(family, params);
  std::string text = npdl::instance_facts(db);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    out << text;
  }
  return kExitAnswer;
}

int cmd_oracle(const CommonArgs& args, bool direct) {
  npdl::LoadedQuery q = load(args);
  if (!q.aq.ok()) return print_diagnostics(q.aq.diagnostics);
  npdl::Program original = npdl::parse_program(read_file(args.program_file));
  npdl::OracleAnswer ans =
      direct ? npdl::oracle_answer_direct(original, q.db) : npdl::oracle_answer(original, q.db);
  if (ans.bound_exceeded) {
    std::cout << "oracle bound exceeded; shrink the instance.\n";
    return kExitResourceLimit;
  }
  if (ans.answers.empty()) {
    std::cout << "no solution.\n";
    return kExitNoSolution;
  }
  if (ans.optimal_cardinality)
    std::cout << "optimal cardinality " << *ans.optimal_cardinality << "\n";
  int i = 0;
  for (const auto& rel : ans.answers) {
    std::cout << "answer " << ++i << ":\n";
    print_relation(original.goal->atom.pred, rel);
  }
  return kExitAnswer;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NP Datalog toolchain: stratified evaluation, constraint-model "
               "transpilation, and finite-domain search"};
  app.require_subcommand(1);

  CommonArgs solve_args, check_args, eval_args, emit_args, oracle_args;
  std::string mode = "first", opt = "all", emit_path, emit_out, gen_out, gen_family;
  long long node_limit = -1, candidate_cap = -1;
  double time_limit = -1;
  bool trace = false, emit_fixp = false, oracle_direct = false;
  std::vector<std::string> gen_params;

  CLI::App* solve = app.add_subcommand("solve", "run the full evaluation pipeline");
  solve->add_option("schema", solve_args.schema_file, "schema file (.nps)")->required();
  solve->add_option("program", solve_args.program_file, "program file (.npd)")->required();
  solve->add_option("facts", solve_args.facts_file, "facts file (.npf)")->required();
  solve->add_option("--mode", mode, "first | all | opt")
      ->check(CLI::IsMember({"first", "all", "opt"}));
  solve->add_option("--opt", opt, "none | all | comma list of pass names");
  solve->add_option("--node-limit", node_limit, "search node cap (-1 = unlimited)");
  solve->add_option("--time-limit", time_limit, "wall-clock cap in seconds (-1 = unlimited)");
  solve->add_option("--candidate-cap", candidate_cap,
                    "max rejected candidates in the recursive check loop");
  solve->add_option("--emit-opl", emit_path, "also write the OPL model to this file");
  solve->add_flag("--trace", trace, "print component sizes and iteration counts");

  CLI::App* check = app.add_subcommand("check", "print diagnostics and the component partition");
  check->add_option("schema", check_args.schema_file)->required();
  check->add_option("program", check_args.program_file)->required();
  check->add_option("facts", check_args.facts_file);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a deterministic program");
  eval->add_option("schema", eval_args.schema_file)->required();
  eval->add_option("program", eval_args.program_file)->required();
  eval->add_option("facts", eval_args.facts_file)->required();

  CLI::App* emit = app.add_subcommand("emit", "write the OPL translation");
  emit->add_option("schema", emit_args.schema_file)->required();
  emit->add_option("program", emit_args.program_file)->required();
  emit->add_option("facts", emit_args.facts_file)->required();
  bool emit_opl_flag = false;
  emit->add_flag("--opl", emit_opl_flag, "emit the OPL model and data (default)");
  emit->add_flag("--fixp", emit_fixp, "emit the OPL-Script fixpoint emulation instead");
  emit->add_option("--opt", opt, "none | all | comma list of pass names");
  emit->add_option("-o,--output", emit_out, "output file (stdout when omitted)");

  CLI::App* gen = app.add_subcommand("gen", "generate a benchmark database");
  gen->add_option("family", gen_family, "chain | cycle | complete | grid-ladder | random-gnp")
      ->required();
  gen->add_option("params", gen_params, "family parameters")->expected(-1);
  gen->add_option("-o,--output", gen_out, "output file (stdout when omitted)");

  CLI::App* oracle = app.add_subcommand("oracle", "reference answers (debugging)");
  oracle->add_option("schema", oracle_args.schema_file)->required();
  oracle->add_option("program", oracle_args.program_file)->required();
  oracle->add_option("facts", oracle_args.facts_file)->required();
  oracle->add_flag("--direct", oracle_direct, "enumerate guess extents directly");
  oracle->group("");  // hidden from help

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed())
      return cmd_solve(solve_args, mode, opt, node_limit, time_limit, candidate_cap, emit_path,
                       trace);
    if (check->parsed()) return cmd_check(check_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (emit->parsed()) return cmd_emit(emit_args, opt, emit_out, emit_fixp);
    if (gen->parsed()) return cmd_gen(gen_family, gen_params, gen_out);
    if (oracle->parsed()) return cmd_oracle(oracle_args, oracle_direct);
  } catch (const npdl::ParseError& e) {
    std::cout << "error: " << e.what() << "\n";
    return kExitDiagnostics;
  } catch (const std::exception& e) {
    std::cout << "error: " << e.what() << "\n";
    return kExitDiagnostics;
  }
  return kExitAnswer;
}
