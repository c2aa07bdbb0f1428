#include "npdl/printer.hpp"

#include <sstream>

namespace npdl {

namespace {

// Arithmetic prints tightly (X+1, Y*Z); comparisons get spaces around the
// operator. Precedence: Mul binds tighter than Add/Sub; both associate left.
void print_expr(std::ostream& os, const Expr& e, int parent_prec) {
  switch (e.kind) {
    case Expr::Kind::Var: os << e.var; return;
    case Expr::Kind::Str: os << e.var; return;
    case Expr::Kind::Int: os << e.value; return;
    case Expr::Kind::Add:
    case Expr::Kind::Sub: {
      // Additive level: never needs parens at top level; a right-hand Sub
      // operand would, but the parser builds left-leaning trees only.
      bool parens = parent_prec > 1;
      if (parens) os << '(';
      print_expr(os, e.args[0], 1);
      os << (e.kind == Expr::Kind::Add ? "+" : "-");
      print_expr(os, e.args[1], 2);
      if (parens) os << ')';
      return;
    }
    case Expr::Kind::Mul:
      print_expr(os, e.args[0], 2);
      os << '*';
      print_expr(os, e.args[1], 3);
      return;
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print_expr(os, e, 0);
  return os.str();
}

std::string to_string(const Atom& a) {
  std::ostringstream os;
  os << a.pred;
  if (!a.args.empty()) {
    os << '(';
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      if (i) os << ',';
      const Term& t = a.args[i];
      os << (t.is_var() ? t.var : to_string(t.value));
    }
    os << ')';
  }
  return os.str();
}

std::string to_string(const Literal& l) {
  switch (l.kind) {
    case Literal::Kind::Atom: return to_string(l.atom);
    case Literal::Kind::NegAtom: return "not " + to_string(l.atom);
    case Literal::Kind::Compare:
      return to_string(l.cmp.lhs) + " " + to_token(l.cmp.op) + " " + to_string(l.cmp.rhs);
  }
  return {};
}

std::string to_string(const Conjunction& c) {
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) out += ", ";
    out += to_string(c[i]);
  }
  return out;
}

namespace {

std::string body_to_string(const Rule& r) {
  std::string out;
  for (std::size_t i = 0; i < r.body.size(); ++i) {
    if (i) out += " ; ";
    out += to_string(r.body[i]);
  }
  return out;
}

}  // namespace

std::string to_string(const Rule& r) {
  switch (r.kind) {
    case RuleKind::Standard:
      if (r.body.size() == 1 && r.body.front().empty()) return to_string(r.head.front()) + ".";
      return to_string(r.head.front()) + " :- " + body_to_string(r) + ".";
    case RuleKind::Subset:
      return to_string(r.head.front()) + " <~ " + body_to_string(r) + ".";
    case RuleKind::Partition: {
      std::string out;
      for (std::size_t i = 0; i < r.head.size(); ++i) {
        if (i) out += " (+) ";
        out += to_string(r.head[i]);
      }
      return out + " :- " + body_to_string(r) + ".";
    }
    case RuleKind::GeneralizedPartition:
      return "(+)[" + r.label_var + "] " + to_string(r.head.front()) + " :- " +
             body_to_string(r) + ".";
    case RuleKind::Constraint: {
      if (r.head.empty()) return ":- " + body_to_string(r) + ".";
      // Normalized constraints carry their disjunctive head explicitly.
      std::string out;
      for (std::size_t i = 0; i < r.head.size(); ++i) {
        if (i) out += " | ";
        out += to_string(r.head[i]);
      }
      return out + " <- " + body_to_string(r) + ".";
    }
  }
  return {};
}

std::string to_string(const Goal& g) {
  switch (g.mode) {
    case Goal::Mode::Plain: return "? " + to_string(g.atom) + ".";
    case Goal::Mode::Min: return "? min |" + to_string(g.atom) + "|.";
    case Goal::Mode::Max: return "? max |" + to_string(g.atom) + "|.";
  }
  return {};
}

std::string print_program(const Program& p) {
  std::string out;
  for (const auto& r : p.rules) {
    out += to_string(r);
    out += '\n';
  }
  if (p.goal) {
    out += to_string(*p.goal);
    out += '\n';
  }
  return out;
}

}  // namespace npdl
