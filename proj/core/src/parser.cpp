#include "npdl/parser.hpp"

#include <cassert>
#include <cctype>
#include <sstream>

namespace npdl {

std::string to_string(const Constant& c) {
  if (std::holds_alternative<std::int64_t>(c)) return std::to_string(std::get<std::int64_t>(c));
  return std::get<std::string>(c);
}

const char* to_token(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

void collect_vars(const Expr& e, std::vector<std::string>& out) {
  if (e.kind == Expr::Kind::Var) {
    out.push_back(e.var);
    return;
  }
  for (const auto& a : e.args) collect_vars(a, out);
}

bool Schema::is_int_domain(const std::string& name) const {
  if (int_domains.count(name)) return true;
  if (name == "integer" && int_range) return true;
  auto it = derived_domains.find(name);
  if (it == derived_domains.end()) return false;
  const DerivedDomain& d = it->second;
  if (d.kind == DerivedDomain::Kind::Enumeration) {
    for (const auto& c : d.constants)
      if (!std::holds_alternative<std::int64_t>(c)) return false;
    return !d.constants.empty();
  }
  for (const auto& p : d.parts)
    if (!is_int_domain(p)) return false;
  return true;
}

int Database::code_of(const std::string& domain, const Constant& c) const {
  const auto* ext = extent(domain);
  if (!ext) return 0;
  for (std::size_t i = 0; i < ext->size(); ++i)
    if ((*ext)[i] == c) return static_cast<int>(i) + 1;
  return 0;
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace {

enum class Tok {
  End, Ident, Var, Int,
  LParen, RParen, LBracket, RBracket, Comma, Period, Semi, Colon, Question, Bar,
  ColonDash,   // :-
  SubsetArrow, // <~
  LeftArrow,   // <-
  OPlus,       // (+)
  Eq, Ne, Lt, Le, Gt, Ge,
  Plus, Minus, Star,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t value = 0;
  SourcePos pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_ws();
    Token t;
    t.pos = pos();
    if (i_ >= src_.size()) return t;
    char c = src_[i_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i_;
      while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
        ++i_;
      t.text.assign(src_.substr(start, i_ - start));
      t.kind = std::isupper(static_cast<unsigned char>(c)) ? Tok::Var : Tok::Ident;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = i_;
      while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) ++i_;
      t.kind = Tok::Int;
      t.text.assign(src_.substr(start, i_ - start));
      try {
        t.value = std::stoll(t.text);
      } catch (const std::out_of_range&) {
        throw ParseError(t.pos, "integer literal '" + t.text + "' is out of range");
      }
      return t;
    }
    auto two = [&](char a, char b) {
      return c == a && i_ + 1 < src_.size() && src_[i_ + 1] == b;
    };
    if (c == '(' && i_ + 2 < src_.size() && src_[i_ + 1] == '+' && src_[i_ + 2] == ')') {
      i_ += 3;
      t.kind = Tok::OPlus;
      return t;
    }
    if (two(':', '-')) { i_ += 2; t.kind = Tok::ColonDash; return t; }
    if (two('<', '~')) { i_ += 2; t.kind = Tok::SubsetArrow; return t; }
    if (two('<', '-')) { i_ += 2; t.kind = Tok::LeftArrow; return t; }
    if (two('<', '=')) { i_ += 2; t.kind = Tok::Le; return t; }
    if (two('>', '=')) { i_ += 2; t.kind = Tok::Ge; return t; }
    if (two('!', '=')) { i_ += 2; t.kind = Tok::Ne; return t; }
    ++i_;
    switch (c) {
      case '(': t.kind = Tok::LParen; return t;
      case ')': t.kind = Tok::RParen; return t;
      case '[': t.kind = Tok::LBracket; return t;
      case ']': t.kind = Tok::RBracket; return t;
      case ',': t.kind = Tok::Comma; return t;
      case '.': t.kind = Tok::Period; return t;
      case ';': t.kind = Tok::Semi; return t;
      case ':': t.kind = Tok::Colon; return t;
      case '?': t.kind = Tok::Question; return t;
      case '|': t.kind = Tok::Bar; return t;
      case '=': t.kind = Tok::Eq; return t;
      case '<': t.kind = Tok::Lt; return t;
      case '>': t.kind = Tok::Gt; return t;
      case '+': t.kind = Tok::Plus; return t;
      case '-': t.kind = Tok::Minus; return t;
      case '*': t.kind = Tok::Star; return t;
      default:
        throw ParseError(t.pos, std::string("unexpected character '") + c + "'");
    }
  }

 private:
  void skip_ws() {
    while (i_ < src_.size()) {
      char c = src_[i_];
      if (c == '%') {
        while (i_ < src_.size() && src_[i_] != '\n') ++i_;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++i_;
      } else {
        break;
      }
    }
  }

  SourcePos pos() const {
    SourcePos p{1, 1};
    for (std::size_t k = 0; k < i_ && k < src_.size(); ++k) {
      if (src_[k] == '\n') {
        ++p.line;
        p.column = 1;
      } else {
        ++p.column;
      }
    }
    return p;
  }

  std::string_view src_;
  std::size_t i_ = 0;
};

class TokenStream {
 public:
  explicit TokenStream(std::string_view src) : lex_(src) { cur_ = lex_.next(); }

  const Token& peek() const { return cur_; }
  Token take() {
    Token t = cur_;
    cur_ = lex_.next();
    return t;
  }
  bool accept(Tok k) {
    if (cur_.kind != k) return false;
    take();
    return true;
  }
  Token expect(Tok k, const char* what) {
    if (cur_.kind != k) fail(std::string("expected ") + what);
    return take();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    std::string got = cur_.kind == Tok::End ? "end of input" : "'" + describe(cur_) + "'";
    throw ParseError(cur_.pos, msg + ", found " + got);
  }

 private:
  static std::string describe(const Token& t) {
    if (!t.text.empty()) return t.text;
    switch (t.kind) {
      case Tok::LParen: return "(";
      case Tok::RParen: return ")";
      case Tok::LBracket: return "[";
      case Tok::RBracket: return "]";
      case Tok::Comma: return ",";
      case Tok::Period: return ".";
      case Tok::Semi: return ";";
      case Tok::Colon: return ":";
      case Tok::Question: return "?";
      case Tok::Bar: return "|";
      case Tok::ColonDash: return ":-";
      case Tok::SubsetArrow: return "<~";
      case Tok::LeftArrow: return "<-";
      case Tok::OPlus: return "(+)";
      case Tok::Eq: return "=";
      case Tok::Ne: return "!=";
      case Tok::Lt: return "<";
      case Tok::Le: return "<=";
      case Tok::Gt: return ">";
      case Tok::Ge: return ">=";
      case Tok::Plus: return "+";
      case Tok::Minus: return "-";
      case Tok::Star: return "*";
      default: return "?";
    }
  }

  Lexer lex_;
  Token cur_;
};

void check_user_name(const TokenStream& ts, const std::string& name) {
  if (name.find(kFreshMarker) != std::string::npos)
    ts.fail("identifier '" + name + "' uses the reserved infix '__st'");
}

}  // namespace

// ---------------------------------------------------------------------------
// Schema parser
// ---------------------------------------------------------------------------

namespace {

std::int64_t parse_signed_int(TokenStream& ts) {
  bool neg = ts.accept(Tok::Minus);
  Token t = ts.expect(Tok::Int, "integer");
  return neg ? -t.value : t.value;
}

}  // namespace

Schema parse_schema(std::string_view text) {
  TokenStream ts(text);
  Schema s;
  std::optional<std::int64_t> min_int, max_int;

  auto declare_domain = [&](const std::string& name, bool is_int) {
    check_user_name(ts, name);
    if (s.string_domains.count(name) || s.int_domains.count(name) || name == "integer")
      ts.fail("duplicate domain '" + name + "'");
    (is_int ? s.int_domains : s.string_domains).insert(name);
  };

  while (ts.peek().kind != Tok::End) {
    Token head = ts.expect(Tok::Var, "section header");
    if (head.text == "DOMAINS" || head.text == "INT") {
      bool is_int = head.text == "INT";
      if (is_int) {
        ts.expect(Tok::Minus, "'-' in INT-DOMAINS");
        Token rest = ts.expect(Tok::Var, "DOMAINS after INT-");
        if (rest.text != "DOMAINS") ts.fail("unknown section header 'INT-" + rest.text + "'");
      }
      ts.expect(Tok::Colon, "':'");
      for (;;) {
        Token name = ts.expect(Tok::Ident, "domain name");
        declare_domain(name.text, is_int);
        if (ts.accept(Tok::Semi)) continue;
        break;
      }
      ts.expect(Tok::Period, "'.'");
    } else if (head.text == "PREDICATES") {
      ts.expect(Tok::Colon, "':'");
      for (;;) {
        Token name = ts.expect(Tok::Ident, "predicate name");
        check_user_name(ts, name.text);
        if (s.predicates.count(name.text)) ts.fail("duplicate predicate '" + name.text + "'");
        if (s.string_domains.count(name.text) || s.int_domains.count(name.text))
          ts.fail("predicate '" + name.text + "' is already declared as a domain");
        std::vector<std::string> sig;
        ts.expect(Tok::LParen, "'('");
        for (;;) {
          Token dom = ts.expect(Tok::Ident, "domain name");
          sig.push_back(dom.text);
          if (ts.accept(Tok::Comma)) continue;
          break;
        }
        ts.expect(Tok::RParen, "')'");
        s.predicates.emplace(name.text, std::move(sig));
        if (ts.accept(Tok::Semi)) continue;
        break;
      }
      ts.expect(Tok::Period, "'.'");
    } else if (head.text == "MinInt" || head.text == "MaxInt") {
      ts.expect(Tok::Eq, "'='");
      std::int64_t v = parse_signed_int(ts);
      ts.expect(Tok::Period, "'.'");
      auto& slot = head.text == "MinInt" ? min_int : max_int;
      if (slot) ts.fail(head.text + " declared twice");
      slot = v;
    } else {
      ts.fail("unknown section header '" + head.text + "'");
    }
  }

  if (min_int.has_value() != max_int.has_value())
    throw ParseError({0, 0}, "MinInt and MaxInt must be declared together");
  if (min_int) {
    if (*min_int > *max_int) throw ParseError({0, 0}, "MinInt exceeds MaxInt");
    s.int_range = std::make_pair(*min_int, *max_int);
  }
  for (const auto& [pred, sig] : s.predicates) {
    for (const auto& dom : sig) {
      if (dom == "integer" && s.int_range) continue;
      if (!s.string_domains.count(dom) && !s.int_domains.count(dom))
        throw ParseError({0, 0}, "signature of '" + pred + "' references undeclared domain '" + dom + "'");
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Program parser
// ---------------------------------------------------------------------------

namespace {

class ProgramParser {
 public:
  explicit ProgramParser(std::string_view text) : ts_(text) {}

  Program parse() {
    Program p;
    while (ts_.peek().kind != Tok::End) {
      if (p.goal) ts_.fail("the query goal must be the last statement");
      if (ts_.accept(Tok::Question)) {
        p.goal = parse_goal();
        continue;
      }
      p.rules.push_back(parse_rule());
    }
    return p;
  }

 private:
  Goal parse_goal() {
    Goal g;
    if (ts_.peek().kind == Tok::Ident && (ts_.peek().text == "min" || ts_.peek().text == "max")) {
      g.mode = ts_.take().text == "min" ? Goal::Mode::Min : Goal::Mode::Max;
      ts_.expect(Tok::Bar, "'|'");
      g.atom = parse_atom();
      ts_.expect(Tok::Bar, "'|'");
    } else {
      g.atom = parse_atom();
    }
    ts_.expect(Tok::Period, "'.'");
    return g;
  }

  Rule parse_rule() {
    if (ts_.accept(Tok::ColonDash)) {
      Rule r;
      r.kind = RuleKind::Constraint;
      r.body.push_back(parse_conjunction());
      ts_.expect(Tok::Period, "'.'");
      return r;
    }
    if (ts_.accept(Tok::OPlus)) return parse_generalized_partition();

    Atom first = parse_atom();
    if (ts_.peek().kind == Tok::OPlus) return parse_partition(std::move(first));
    if (ts_.peek().kind == Tok::Bar || ts_.peek().kind == Tok::LeftArrow)
      return parse_constraint_sugar(std::move(first));

    Rule r;
    r.head.push_back(std::move(first));
    if (ts_.accept(Tok::SubsetArrow)) {
      r.kind = RuleKind::Subset;
      r.body.push_back(parse_conjunction());
      ts_.expect(Tok::Period, "'.'");
      return r;
    }
    r.kind = RuleKind::Standard;
    if (ts_.accept(Tok::Period)) {
      // Ground fact: single empty conjunct (a vacuously true body).
      for (const auto& t : r.head.front().args)
        if (t.is_var()) ts_.fail("fact '" + r.head.front().pred + "' must be ground");
      r.body.push_back(Conjunction{});
      return r;
    }
    ts_.expect(Tok::ColonDash, "':-' or '.'");
    r.body.push_back(parse_conjunction());
    while (ts_.accept(Tok::Semi)) r.body.push_back(parse_conjunction());
    ts_.expect(Tok::Period, "'.'");
    return r;
  }

  Rule parse_generalized_partition() {
    Rule r;
    r.kind = RuleKind::GeneralizedPartition;
    ts_.expect(Tok::LBracket, "'['");
    r.label_var = ts_.expect(Tok::Var, "partition variable").text;
    ts_.expect(Tok::RBracket, "']'");
    r.head.push_back(parse_atom());
    const Atom& h = r.head.front();
    if (h.args.empty() || !h.args.back().is_var() || h.args.back().var != r.label_var)
      ts_.fail("the last argument of a generalized partition head must be the partition variable");
    for (std::size_t i = 0; i + 1 < h.args.size(); ++i)
      if (h.args[i].is_var() && h.args[i].var == r.label_var)
        ts_.fail("the partition variable may appear only as the last head argument");
    ts_.expect(Tok::ColonDash, "':-'");
    Conjunction body = parse_conjunction();
    if (body.empty() || body.back().kind != Literal::Kind::Atom ||
        body.back().atom.args.size() != 1 || !body.back().atom.args.front().is_var() ||
        body.back().atom.args.front().var != r.label_var)
      ts_.fail("a generalized partition body must end with a unary atom over the partition variable");
    for (std::size_t i = 0; i + 1 < body.size(); ++i)
      for_each_var(body[i], [&](const std::string& v) {
        if (v == r.label_var)
          ts_.fail("the partition variable may appear in the body only in its final domain atom");
      });
    r.body.push_back(std::move(body));
    ts_.expect(Tok::Period, "'.'");
    return r;
  }

  Rule parse_partition(Atom first) {
    Rule r;
    r.kind = RuleKind::Partition;
    r.head.push_back(std::move(first));
    while (ts_.accept(Tok::OPlus)) r.head.push_back(parse_atom());
    if (r.head.size() < 2) ts_.fail("a partition rule needs at least two head atoms");
    ts_.expect(Tok::ColonDash, "':-'");
    r.body.push_back(parse_conjunction());
    ts_.expect(Tok::Period, "'.'");
    validate_partition_heads(r);
    return r;
  }

  void validate_partition_heads(const Rule& r) {
    const auto& heads = r.head;
    bool same_pred = true;
    for (const auto& a : heads) same_pred = same_pred && a.pred == heads.front().pred;
    if (same_pred) {
      // Form (5): one predicate, identical variable prefix, pairwise-distinct
      // constants in the last position.
      std::set<Constant> consts;
      for (const auto& a : heads) {
        if (a.args.empty() || a.args.back().is_var())
          ts_.fail("single-predicate partition heads must end in distinct constants");
        if (!consts.insert(a.args.back().value).second)
          ts_.fail("partition head constants must be pairwise distinct");
        if (a.args.size() != heads.front().args.size())
          ts_.fail("partition heads must share one variable vector");
        for (std::size_t i = 0; i + 1 < a.args.size(); ++i)
          if (!(a.args[i] == heads.front().args[i]) || !a.args[i].is_var())
            ts_.fail("partition heads must share one variable vector");
      }
      return;
    }
    // Form (4): pairwise-distinct predicates over one shared variable vector.
    std::set<std::string> preds;
    for (const auto& a : heads) {
      if (!preds.insert(a.pred).second)
        ts_.fail("partition heads mix the distinct-predicate and distinct-constant forms");
      if (a.args.size() != heads.front().args.size())
        ts_.fail("partition heads must share one variable vector");
      for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (!a.args[i].is_var())
          ts_.fail("partition heads mix the distinct-predicate and distinct-constant forms");
        if (!(a.args[i] == heads.front().args[i]))
          ts_.fail("partition heads must share one variable vector");
      }
    }
  }

  Rule parse_constraint_sugar(Atom first) {
    // a1 | ... | am <- body.  desugars to  :- body, not a1, ..., not am.
    std::vector<Atom> heads;
    heads.push_back(std::move(first));
    while (ts_.accept(Tok::Bar)) heads.push_back(parse_atom());
    ts_.expect(Tok::LeftArrow, "'<-'");
    Rule r;
    r.kind = RuleKind::Constraint;
    Conjunction body = parse_conjunction();
    for (auto& a : heads) body.push_back(Literal::negative(std::move(a)));
    r.body.push_back(std::move(body));
    ts_.expect(Tok::Period, "'.'");
    return r;
  }

  Conjunction parse_conjunction() {
    Conjunction conj;
    for (;;) {
      conj.push_back(parse_literal());
      if (!ts_.accept(Tok::Comma)) break;
    }
    return conj;
  }

  Literal parse_literal() {
    if (ts_.peek().kind == Tok::Ident && ts_.peek().text == "not") {
      ts_.take();
      return Literal::negative(parse_atom());
    }
    if (ts_.peek().kind == Tok::Ident) {
      // An identifier opens an atom unless it is a bare symbol in a
      // comparison; disambiguate by what follows.
      Token name = ts_.take();
      check_user_name(ts_, name.text);
      if (ts_.peek().kind == Tok::LParen) {
        Atom a;
        a.pred = name.text;
        a.args = parse_args();
        return Literal::positive(std::move(a));
      }
      if (is_compare_start(ts_.peek().kind) || is_arith(ts_.peek().kind)) {
        Expr lhs = continue_expr(Expr::symbol(name.text));
        return finish_comparison(std::move(lhs));
      }
      Atom a;
      a.pred = name.text;
      return Literal::positive(std::move(a));
    }
    Expr lhs = parse_expr();
    return finish_comparison(std::move(lhs));
  }

  Literal finish_comparison(Expr lhs) {
    CompareOp op;
    switch (ts_.peek().kind) {
      case Tok::Eq: op = CompareOp::Eq; break;
      case Tok::Ne: op = CompareOp::Ne; break;
      case Tok::Lt: op = CompareOp::Lt; break;
      case Tok::Le: op = CompareOp::Le; break;
      case Tok::Gt: op = CompareOp::Gt; break;
      case Tok::Ge: op = CompareOp::Ge; break;
      default: ts_.fail("expected comparison operator");
    }
    ts_.take();
    Expr rhs = parse_expr();
    return Literal::compare(Comparison{std::move(lhs), op, std::move(rhs)});
  }

  static bool is_compare_start(Tok k) {
    return k == Tok::Eq || k == Tok::Ne || k == Tok::Lt || k == Tok::Le || k == Tok::Gt ||
           k == Tok::Ge;
  }
  static bool is_arith(Tok k) { return k == Tok::Plus || k == Tok::Minus || k == Tok::Star; }

  Atom parse_atom() {
    Token name = ts_.expect(Tok::Ident, "predicate name");
    check_user_name(ts_, name.text);
    Atom a;
    a.pred = name.text;
    if (ts_.peek().kind == Tok::LParen) a.args = parse_args();
    return a;
  }

  std::vector<Term> parse_args() {
    ts_.expect(Tok::LParen, "'('");
    std::vector<Term> args;
    for (;;) {
      args.push_back(parse_term());
      if (ts_.accept(Tok::Comma)) continue;
      break;
    }
    ts_.expect(Tok::RParen, "')'");
    return args;
  }

  Term parse_term() {
    const Token& t = ts_.peek();
    if (t.kind == Tok::Var) return Term::variable(ts_.take().text);
    if (t.kind == Tok::Ident) return Term::constant(str_const(ts_.take().text));
    if (t.kind == Tok::Int || t.kind == Tok::Minus) return Term::constant(int_const(parse_signed_int(ts_)));
    ts_.fail("expected a term");
  }

  Expr parse_expr() { return continue_expr(parse_mul()); }

  Expr continue_expr(Expr first) {
    // `first` may already be a complete factor; extend with * then +/-.
    Expr lhs = continue_mul(std::move(first));
    while (ts_.peek().kind == Tok::Plus || ts_.peek().kind == Tok::Minus) {
      bool add = ts_.take().kind == Tok::Plus;
      Expr rhs = parse_mul();
      lhs = Expr::binary(add ? Expr::Kind::Add : Expr::Kind::Sub, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr parse_mul() { return continue_mul(parse_factor()); }

  Expr continue_mul(Expr lhs) {
    while (ts_.peek().kind == Tok::Star) {
      ts_.take();
      Expr rhs = parse_factor();
      lhs = Expr::binary(Expr::Kind::Mul, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr parse_factor() {
    const Token& t = ts_.peek();
    if (t.kind == Tok::Var) return Expr::variable(ts_.take().text);
    if (t.kind == Tok::Ident) return Expr::symbol(ts_.take().text);
    if (t.kind == Tok::Int || t.kind == Tok::Minus) return Expr::integer(parse_signed_int(ts_));
    if (t.kind == Tok::LParen) {
      ts_.take();
      Expr e = parse_expr();
      ts_.expect(Tok::RParen, "')'");
      return e;
    }
    ts_.fail("expected a variable, constant, or integer");
  }

  template <class F>
  static void for_each_var(const Literal& lit, F&& f) {
    if (lit.kind == Literal::Kind::Compare) {
      std::vector<std::string> vs;
      collect_vars(lit.cmp.lhs, vs);
      collect_vars(lit.cmp.rhs, vs);
      for (const auto& v : vs) f(v);
      return;
    }
    for (const auto& t : lit.atom.args)
      if (t.is_var()) f(t.var);
  }

  TokenStream ts_;
};

}  // namespace

Program parse_program(std::string_view text) { return ProgramParser(text).parse(); }

// ---------------------------------------------------------------------------
// Database parser
// ---------------------------------------------------------------------------

namespace {

bool constant_in(const Constant& c, const std::vector<Constant>& ext) {
  for (const auto& e : ext)
    if (e == c) return true;
  return false;
}

}  // namespace

void materialize_domains(const Schema& schema, Database& db) {
  if (schema.int_range) {
    auto& ext = db.extents["integer"];
    ext.clear();
    for (std::int64_t v = schema.int_range->first; v <= schema.int_range->second; ++v)
      ext.push_back(int_const(v));
  }
  // Derived domains may reference other derived domains; resolve until stable.
  std::size_t remaining = schema.derived_domains.size();
  bool progress = true;
  while (remaining > 0 && progress) {
    progress = false;
    for (const auto& [name, dd] : schema.derived_domains) {
      if (db.extents.count(name)) continue;
      if (dd.kind == DerivedDomain::Kind::Enumeration) {
        db.extents[name] = dd.constants;
        --remaining, progress = true;
        continue;
      }
      bool ready = true;
      for (const auto& p : dd.parts) ready = ready && db.extents.count(p) > 0;
      if (!ready) continue;
      std::vector<Constant> ext;
      if (dd.kind == DerivedDomain::Kind::Union) {
        std::set<Constant> seen;
        for (const auto& p : dd.parts)
          for (const auto& c : db.extents[p])
            if (seen.insert(c).second) ext.push_back(c);
      } else {
        for (const auto& c : db.extents[dd.parts.front()]) {
          bool everywhere = true;
          for (std::size_t i = 1; i < dd.parts.size(); ++i)
            everywhere = everywhere && constant_in(c, db.extents[dd.parts[i]]);
          if (everywhere) ext.push_back(c);
        }
      }
      db.extents[name] = std::move(ext);
      --remaining, progress = true;
    }
  }
  if (remaining > 0) throw std::runtime_error("unresolvable derived domain definitions");
}

Database parse_database(std::string_view text, const Schema& schema) {
  TokenStream ts(text);
  Database db;
  for (const auto& d : schema.string_domains) db.extents[d];
  for (const auto& d : schema.int_domains) db.extents[d];

  struct PendingFact {
    std::string pred;
    Tuple tuple;
    SourcePos pos;
  };
  std::vector<PendingFact> pending;

  while (ts.peek().kind != Tok::End) {
    for (;;) {
      SourcePos at = ts.peek().pos;
      Token name = ts.expect(Tok::Ident, "predicate name");
      Tuple tuple;
      if (ts.peek().kind == Tok::LParen) {
        ts.take();
        for (;;) {
          const Token& t = ts.peek();
          if (t.kind == Tok::Ident) {
            tuple.push_back(str_const(ts.take().text));
          } else if (t.kind == Tok::Int || t.kind == Tok::Minus) {
            tuple.push_back(int_const(parse_signed_int(ts)));
          } else {
            ts.fail("facts must be ground");
          }
          if (ts.accept(Tok::Comma)) continue;
          break;
        }
        ts.expect(Tok::RParen, "')'");
      }

      if (name.text == "integer") {
        throw ParseError(at, "the 'integer' domain is populated from MinInt..MaxInt, not facts");
      } else if (schema.string_domains.count(name.text) || schema.int_domains.count(name.text)) {
        if (tuple.size() != 1)
          throw ParseError(at, "domain fact '" + name.text + "' must be unary");
        bool is_int = schema.int_domains.count(name.text) > 0;
        if (is_int && !std::holds_alternative<std::int64_t>(tuple.front()))
          throw ParseError(at, "non-integer constant in integer domain '" + name.text + "'");
        if (!is_int && !std::holds_alternative<std::string>(tuple.front()))
          throw ParseError(at, "integer constant in string domain '" + name.text + "'");
        auto& ext = db.extents[name.text];
        if (!constant_in(tuple.front(), ext)) ext.push_back(tuple.front());
      } else {
        if (schema.idb_predicates.count(name.text))
          throw ParseError(at, "'" + name.text + "' is a derived predicate, not a base relation");
        auto sig = schema.predicates.find(name.text);
        if (sig == schema.predicates.end())
          throw ParseError(at, "fact predicate '" + name.text + "' is not declared");
        if (tuple.size() != sig->second.size())
          throw ParseError(at, "arity mismatch for '" + name.text + "': expected " +
                                   std::to_string(sig->second.size()) + " arguments");
        pending.push_back(PendingFact{name.text, std::move(tuple), at});
      }
      if (ts.accept(Tok::Comma)) continue;
      break;
    }
    ts.expect(Tok::Period, "'.'");
  }

  materialize_domains(schema, db);

  // Validate relation facts against the extents once all domain facts are in.
  for (auto& f : pending) {
    const auto& sig = schema.predicates.at(f.pred);
    for (std::size_t i = 0; i < f.tuple.size(); ++i) {
      const std::string& dom = sig[i];
      const auto* ext = db.extent(dom);
      if (!ext || !constant_in(f.tuple[i], *ext))
        throw ParseError(f.pos, "constant '" + to_string(f.tuple[i]) + "' is outside domain '" +
                                    dom + "' in fact for '" + f.pred + "'");
    }
    db.facts[f.pred].insert(std::move(f.tuple));
  }
  // Every declared base predicate has a (possibly empty) relation.
  for (const auto& [pred, sig] : schema.predicates)
    if (!schema.idb_predicates.count(pred)) db.facts[pred];
  return db;
}

}  // namespace npdl
