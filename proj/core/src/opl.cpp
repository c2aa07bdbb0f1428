#include "npdl/opl.hpp"

#include <cassert>
#include <cctype>
#include <sstream>

#include "npdl/analysis.hpp"

namespace npdl {

namespace {

const char* opl_op(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

// Printing context: determines where parentheses are required. Matches the
// layout of the translation examples: membership tests and comparisons are
// parenthesized inside products and nested comparisons, sums print bare on
// comparison sides, and sum bodies wrap non-atomic content.
enum class Ctx { Top, CompareSide, Operand, SumBody };

void print_term(std::ostringstream& os, const MTerm& t, Ctx ctx);

void print_bindings(std::ostringstream& os, const std::vector<MBinding>& bindings,
                    const std::vector<MTerm>& guard) {
  for (std::size_t i = 0; i < bindings.size(); ++i) {
    if (i) os << ", ";
    const MBinding& b = bindings[i];
    switch (b.kind) {
      case MBinding::Kind::Domain:
        os << b.vars.front() << " in " << b.domain;
        break;
      case MBinding::Kind::Tuple: {
        os << '<';
        for (std::size_t k = 0; k < b.vars.size(); ++k) {
          if (k) os << ',';
          os << b.vars[k];
        }
        os << "> in " << b.domain;
        break;
      }
      case MBinding::Kind::IntRange:
        os << b.vars.front() << " in " << b.range;
        break;
    }
  }
  if (!guard.empty()) {
    os << " : ";
    for (std::size_t i = 0; i < guard.size(); ++i) {
      if (i) os << " && ";
      print_term(os, guard[i], Ctx::Top);
    }
  }
}

void print_term(std::ostringstream& os, const MTerm& t, Ctx ctx) {
  switch (t.kind) {
    case MTerm::Kind::IntLit: os << t.value; return;
    case MTerm::Kind::StrLit: os << t.text; return;
    case MTerm::Kind::False: os << "false"; return;
    case MTerm::Kind::VarRef: os << t.text; return;
    case MTerm::Kind::ArrayAccess: {
      os << t.text;
      if (!t.args.empty()) {
        os << '[';
        for (std::size_t i = 0; i < t.args.size(); ++i) {
          if (i) os << ',';
          print_term(os, t.args[i], Ctx::Top);
        }
        os << ']';
      }
      return;
    }
    case MTerm::Kind::Decode:
      os << "val_" << t.text << '(';
      print_term(os, t.args[0], Ctx::Top);
      os << ')';
      return;
    case MTerm::Kind::Encode:
      os << "idx_" << t.text << '(';
      print_term(os, t.args[0], Ctx::Top);
      os << ')';
      return;
    case MTerm::Kind::Sum: {
      bool parens = ctx == Ctx::Operand || ctx == Ctx::SumBody;
      if (parens) os << '(';
      os << "sum(";
      print_bindings(os, t.bindings, t.guard);
      os << ") ";
      print_term(os, t.args[0], Ctx::SumBody);
      if (parens) os << ')';
      return;
    }
    case MTerm::Kind::Mul: {
      bool parens = ctx == Ctx::Operand || ctx == Ctx::SumBody;
      if (parens) os << '(';
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i) os << " * ";
        print_term(os, t.args[i], Ctx::Operand);
      }
      if (parens) os << ')';
      return;
    }
    case MTerm::Kind::Add: {
      bool parens = ctx != Ctx::Top;
      if (parens) os << '(';
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i) os << " + ";
        print_term(os, t.args[i], Ctx::Operand);
      }
      if (parens) os << ')';
      return;
    }
    case MTerm::Kind::Sub: {
      os << "(";
      print_term(os, t.args[0], Ctx::Operand);
      os << " - ";
      print_term(os, t.args[1], Ctx::Operand);
      os << ")";
      return;
    }
    case MTerm::Kind::Compare: {
      bool parens = ctx != Ctx::Top;
      if (parens) os << '(';
      print_term(os, t.args[0], Ctx::CompareSide);
      os << ' ' << opl_op(t.op) << ' ';
      print_term(os, t.args[1], Ctx::CompareSide);
      if (parens) os << ')';
      return;
    }
  }
}

std::string dims_text(const std::vector<std::string>& dims) {
  if (dims.empty()) return {};
  std::string out = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += ",";
    out += dims[i];
  }
  out += "]";
  return out;
}

void print_decl(std::ostringstream& os, const MDecl& d) {
  switch (d.kind) {
    case MDecl::Kind::BoolArray:
      os << "dvar boolean " << d.name << dims_text(d.dims) << ";\n";
      break;
    case MDecl::Kind::IntArray:
      os << "dvar int " << d.name << dims_text(d.dims) << " in " << d.range << ";\n";
      break;
    case MDecl::Kind::KnownArray:
      os << "int " << d.name << dims_text(d.dims) << ";\n";
      break;
    case MDecl::Kind::CardConst:
      os << "int " << d.name << " = card(" << d.domain << ");\n";
      break;
    case MDecl::Kind::RangeDef:
      os << "range " << d.name << " = " << d.lo << ".." << d.card << ";\n";
      break;
  }
}

}  // namespace

std::string emit_opl_model(const ConstraintModel& m) {
  std::ostringstream os;
  for (const auto& d : m.decls) print_decl(os, d);
  if (m.objective) {
    os << (m.objective->maximize ? "maximize" : "minimize") << "\n    ";
    MTerm obj = MTerm::sum(m.objective->bindings, m.objective->body);
    obj.guard = m.objective->guard;
    print_term(os, obj, Ctx::Top);
    os << ";\n";
  }
  os << "subject to {\n";
  for (const auto& c : m.constraints) {
    os << "    ";
    if (!c.bindings.empty() || !c.guard.empty()) {
      os << "forall (";
      print_bindings(os, c.bindings, c.guard);
      os << ")\n        ";
    }
    print_term(os, c.lhs, Ctx::Top);
    os << (c.kind == MConstraint::Kind::Iff ? " <=> " : " => ");
    if (c.rhs_false)
      os << "false";
    else
      print_term(os, c.rhs, Ctx::Top);
    os << ";\n";
  }
  os << "};\n";
  return os.str();
}

std::string emit_opl_data(const Schema& schema, const Database& db) {
  std::ostringstream os;
  for (const auto& [dom, ext] : db.extents) {
    if (dom == "integer" && schema.int_range) {
      os << "{int} integer = asSet(" << schema.int_range->first << " .. "
         << schema.int_range->second << ");\n";
      continue;
    }
    bool ints = schema.is_int_domain(dom);
    os << (ints ? "{int} " : "{string} ") << dom << " = {";
    for (std::size_t i = 0; i < ext.size(); ++i) {
      if (i) os << ", ";
      os << to_string(ext[i]);
    }
    os << "};\n";
  }
  for (const auto& [pred, sig] : schema.predicates) {
    if (schema.idb_predicates.count(pred)) continue;
    auto rel = db.facts.find(pred);
    if (sig.size() == 1) {
      // Unary relations print as plain sets.
      bool ints = schema.is_int_domain(sig.front());
      os << (ints ? "{int} " : "{string} ") << pred << " = {";
      if (rel != db.facts.end()) {
        const auto& rows = rel->second.rows();
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (i) os << ", ";
          os << to_string(rows[i].front());
        }
      }
      os << "};\n";
      continue;
    }
    os << "tuple " << pred << "_type {";
    for (std::size_t i = 0; i < sig.size(); ++i)
      os << (schema.is_int_domain(sig[i]) ? "int a" : "string a") << (i + 1) << "; ";
    os << "};\n";
    os << "{" << pred << "_type} " << pred << " = {";
    if (rel != db.facts.end()) {
      const auto& rows = rel->second.rows();
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i) os << ", ";
        os << '<';
        for (std::size_t k = 0; k < rows[i].size(); ++k) {
          if (k) os << ',';
          os << to_string(rows[i][k]);
        }
        os << '>';
      }
    }
    os << "};\n";
  }
  return os.str();
}

namespace {

// Nested 0/1 initializer for a known-value array, row-major over extents.
void print_known_values(std::ostringstream& os, const std::string& pred,
                        const std::vector<const std::vector<Constant>*>& extents,
                        std::size_t dim, Tuple& prefix, const Interpretation& known) {
  if (dim == extents.size()) {
    os << (known.contains(pred, prefix) ? 1 : 0);
    return;
  }
  os << '[';
  const auto& ext = *extents[dim];
  for (std::size_t i = 0; i < ext.size(); ++i) {
    if (i) os << ", ";
    prefix.push_back(ext[i]);
    print_known_values(os, pred, extents, dim + 1, prefix, known);
    prefix.pop_back();
  }
  os << ']';
}

}  // namespace

std::string emit_opl(const ConstraintModel& m, const Schema& schema, const Database& db,
                     const Interpretation* known) {
  std::string out = emit_opl_data(schema, db);
  if (known) {
    // Known-value arrays print as initialized data; the model section then
    // skips their declarations.
    ConstraintModel rest = m;
    std::vector<MDecl> kept;
    std::ostringstream os;
    for (const auto& d : rest.decls) {
      if (d.kind != MDecl::Kind::KnownArray) {
        kept.push_back(d);
        continue;
      }
      std::vector<const std::vector<Constant>*> extents;
      bool complete = true;
      for (const auto& dim : d.dims) {
        const auto* ext = db.extent(dim);
        complete = complete && ext != nullptr;
        extents.push_back(ext);
      }
      if (!complete) {
        kept.push_back(d);
        continue;
      }
      os << "int " << d.name << dims_text(d.dims) << " = ";
      Tuple prefix;
      print_known_values(os, d.name, extents, 0, prefix, *known);
      os << ";\n";
    }
    rest.decls = std::move(kept);
    return out + os.str() + emit_opl_model(rest);
  }
  return out + emit_opl_model(m);
}

// ---------------------------------------------------------------------------
// Fixpoint script emission
// ---------------------------------------------------------------------------

namespace {

std::string script_dims(const std::vector<std::string>& dims) {
  std::string out;
  for (const auto& d : dims) out += "[" + d + "]";
  return out;
}

std::string script_expr(const Expr& e, const std::map<std::string, std::string>& env) {
  switch (e.kind) {
    case Expr::Kind::Var: return env.at(e.var);
    case Expr::Kind::Int: return std::to_string(e.value);
    case Expr::Kind::Str: return "\"" + e.var + "\"";
    case Expr::Kind::Add: return script_expr(e.args[0], env) + "+" + script_expr(e.args[1], env);
    case Expr::Kind::Sub: return script_expr(e.args[0], env) + "-" + script_expr(e.args[1], env);
    case Expr::Kind::Mul: return script_expr(e.args[0], env) + "*" + script_expr(e.args[1], env);
  }
  return {};
}

}  // namespace

std::string emit_fixp_script(const std::vector<Rule>& rules, const Schema& schema) {
  StratifyResult strat = stratify_rules(rules);
  if (!strat.diagnostics.empty())
    throw std::logic_error("emit_fixp_script requires stratified rules");

  std::ostringstream os;
  std::set<std::string> declared;
  for (const auto& r : rules) {
    if (r.kind != RuleKind::Standard) continue;
    const std::string& pred = r.head.front().pred;
    if (!declared.insert(pred).second) continue;
    auto sig = schema.predicates.find(pred);
    os << "// " << pred << " declaration\n";
    os << "int " << pred
       << (sig != schema.predicates.end() ? script_dims(sig->second) : std::string()) << ";\n";
  }
  os << "execute {\n";

  for (std::size_t si = 0; si < strat.strata.size(); ++si) {
    const auto& stratum = strat.strata[si];
    std::set<std::string> stratum_preds;
    for (int ri : stratum) stratum_preds.insert(rules[ri].head.front().pred);

    // A rule is recursive within its stratum when its body mentions a
    // predicate defined in the same stratum.
    auto recursive = [&](const Rule& r) {
      for (const auto& conj : r.body)
        for (const auto& lit : conj)
          if (lit.kind != Literal::Kind::Compare && stratum_preds.count(lit.atom.pred))
            return true;
      return false;
    };

    std::vector<int> exit_rules, rec_rules;
    for (int ri : stratum) (recursive(rules[ri]) ? rec_rules : exit_rules).push_back(ri);

    int loop_counter = 0;
    auto emit_rule = [&](const Rule& r, bool in_while, const std::string& indent) {
      for (const auto& conj : r.body) {
        std::map<std::string, std::string> env;
        std::vector<std::string> loops;
        std::vector<std::string> conds;
        for (const auto& lit : conj) {
          if (lit.kind == Literal::Kind::Compare) {
            conds.push_back(script_expr(lit.cmp.lhs, env) + " " +
                            (lit.cmp.op == CompareOp::Eq ? "==" : to_token(lit.cmp.op)) + " " +
                            script_expr(lit.cmp.rhs, env));
            continue;
          }
          const Atom& a = lit.atom;
          bool negated = lit.kind == Literal::Kind::NegAtom;
          bool is_data = schema.is_domain(a.pred) ||
                         (schema.predicates.count(a.pred) && !declared.count(a.pred));
          if (is_data && !negated) {
            if (schema.is_domain(a.pred)) {
              const Term& t = a.args.front();
              if (t.is_var() && !env.count(t.var)) {
                std::string v = "x" + std::to_string(++loop_counter);
                env[t.var] = v;
                loops.push_back("for (var " + v + " in " + a.pred + ")");
              } else {
                conds.push_back(a.pred + ".contains(" +
                                (t.is_var() ? env.at(t.var) : to_string(t.value)) + ")");
              }
            } else {
              std::string v = "e" + std::to_string(++loop_counter);
              loops.push_back("for (var " + v + " in " + a.pred + ")");
              for (std::size_t k = 0; k < a.args.size(); ++k) {
                std::string field = v + ".a" + std::to_string(k + 1);
                const Term& t = a.args[k];
                if (t.is_var()) {
                  auto [it, fresh] = env.emplace(t.var, field);
                  if (!fresh) conds.push_back(field + " == " + it->second);
                } else {
                  conds.push_back(field + " == " + to_string(t.value));
                }
              }
            }
            continue;
          }
          // Derived predicate (or negated data): an array test, looping over
          // signature domains for unbound variables.
          auto sig = schema.predicates.find(a.pred);
          std::string cell = a.pred;
          for (std::size_t k = 0; k < a.args.size(); ++k) {
            const Term& t = a.args[k];
            std::string idx;
            if (t.is_var()) {
              auto it = env.find(t.var);
              if (it == env.end()) {
                std::string v = "x" + std::to_string(++loop_counter);
                std::string dom = sig != schema.predicates.end() ? sig->second[k] : "";
                loops.push_back("for (var " + v + " in " + dom + ")");
                env[t.var] = v;
                idx = v;
              } else {
                idx = it->second;
              }
            } else {
              idx = to_string(t.value);
            }
            cell += "[" + idx + "]";
          }
          conds.push_back(cell + (negated ? " == 0" : " == 1"));
        }

        const Atom& head = r.head.front();
        std::string head_cell = head.pred;
        for (const auto& t : head.args)
          head_cell += "[" + (t.is_var() ? env.at(t.var) : to_string(t.value)) + "]";
        if (in_while) conds.push_back(head_cell + " == 0");

        std::string ind = indent;
        for (const auto& l : loops) {
          os << ind << l << "\n";
          ind += "    ";
        }
        if (!conds.empty()) {
          os << ind << "if (";
          for (std::size_t i = 0; i < conds.size(); ++i) os << (i ? " && " : "") << conds[i];
          os << ") {\n";
          ind += "    ";
        }
        os << ind << head_cell << " = 1;\n";
        if (in_while) os << ind << "modified = true;\n";
        if (!conds.empty()) {
          ind.resize(ind.size() - 4);
          os << ind << "}\n";
        }
      }
    };

    if (!exit_rules.empty()) {
      os << "    // exit rules (stratum " << si << ")\n";
      for (int ri : exit_rules) emit_rule(rules[ri], false, "    ");
    }
    if (!rec_rules.empty()) {
      os << "    // recursive rules (stratum " << si << ")\n";
      os << "    var modified = true;\n";
      os << "    while (modified) {\n";
      os << "        modified = false;\n";
      for (int ri : rec_rules) emit_rule(rules[ri], true, "        ");
      os << "    }\n";
    }
  }
  os << "}\n";
  return os.str();
}

std::vector<std::string> opl_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto is_word = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (text.compare(i, 2, "//") == 0) {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (is_word(c)) {
      std::size_t start = i;
      while (i < text.size() && is_word(text[i])) ++i;
      out.push_back(text.substr(start, i - start));
      continue;
    }
    for (const char* two : {"==", "!=", "<=>", "=>", "<=", ">=", "..", "&&"}) {
      std::size_t n = std::string(two).size();
      if (text.compare(i, n, two) == 0) {
        out.push_back(two);
        i += n;
        goto next;
      }
    }
    out.push_back(std::string(1, c));
    ++i;
  next:;
  }
  return out;
}

}  // namespace npdl
