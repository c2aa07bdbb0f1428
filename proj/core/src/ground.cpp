#include "npdl/ground.hpp"

#include <cassert>
#include <functional>
#include <stdexcept>

namespace npdl {

int GroundModel::cell_of(int layout, const std::vector<int>& offsets) const {
  const Layout& l = layouts[layout];
  int idx = 0;
  for (std::size_t i = 0; i < offsets.size(); ++i)
    idx = idx * static_cast<int>(l.dim_display[i].size()) + offsets[i];
  return l.cell_base + idx;
}

const GroundModel::Layout& GroundModel::layout_of_cell(int cell) const {
  for (const auto& l : layouts) {
    if (cell >= l.cell_base && cell < l.cell_base + static_cast<int>(l.cell_count())) return l;
  }
  throw std::logic_error("cell id out of range");
}

bool GroundModel::cell_is_bool(int cell) const { return layout_of_cell(cell).is_bool; }
int GroundModel::cell_lo(int cell) const {
  const Layout& l = layout_of_cell(cell);
  return l.is_bool ? 0 : l.lo;
}
int GroundModel::cell_hi(int cell) const {
  const Layout& l = layout_of_cell(cell);
  return l.is_bool ? 1 : l.hi;
}

std::size_t GroundModel::assignment_space() const {
  std::size_t n = 1;
  for (const auto& l : layouts) {
    std::size_t values = l.is_bool ? 2 : static_cast<std::size_t>(l.hi - l.lo + 1);
    for (std::size_t c = 0; c < l.cell_count(); ++c) {
      n *= values;
      if (n > (std::size_t{1} << 62)) return n;  // saturate
    }
  }
  return n;
}

namespace {

// A bound value: either a domain constant or an integer code of a domain.
struct EnvVal {
  Constant value;
  bool is_code = false;
  std::string code_domain;
};

using Env = std::map<std::string, EnvVal>;

Constant decode_val(const EnvVal& v, const Database& db) {
  if (!v.is_code) return v.value;
  std::int64_t code = std::get<std::int64_t>(v.value);
  const auto* ext = db.extent(v.code_domain);
  if (!ext || code < 1 || code > static_cast<std::int64_t>(ext->size()))
    throw std::runtime_error("integer code " + std::to_string(code) +
                             " has no value in domain '" + v.code_domain + "'");
  return (*ext)[static_cast<std::size_t>(code - 1)];
}

// Instantiation result: a folded constant (integer or symbol) or a node.
struct GValue {
  enum class Kind { Int, Str, Node } kind = Kind::Int;
  std::int64_t i = 0;
  std::string s;
  int node = -1;
};

class Grounder {
 public:
  Grounder(const ConstraintModel& m, const Database& db, const Interpretation& known)
      : model_(m), db_(db), known_(known) {}

  GroundModel run() {
    build_layouts();
    if (model_.objective) {
      out_.has_objective = true;
      out_.maximize = model_.objective->maximize;
      Env env;
      expand_bindings(model_.objective->bindings, 0, model_.objective->guard, env, [&](Env& e) {
        GValue v = instantiate(model_.objective->body, e);
        out_.objective_nodes.push_back(as_node(v));
      });
    }
    for (const auto& c : model_.constraints) {
      Env env;
      expand_bindings(c.bindings, 0, c.guard, env, [&](Env& e) { emit_constraint(c, e); });
    }
    return std::move(out_);
  }

 private:
  void build_layouts() {
    for (const auto& d : model_.decls) {
      if (d.kind != MDecl::Kind::BoolArray && d.kind != MDecl::Kind::IntArray) continue;
      GroundModel::Layout l;
      l.name = d.name;
      l.is_bool = d.kind == MDecl::Kind::BoolArray;
      if (!l.is_bool) {
        auto [lo, domain] = range_info(d.range);
        const auto* ext = db_.extent(domain);
        if (!ext) throw std::runtime_error("unknown domain '" + domain + "'");
        l.lo = lo;
        l.hi = static_cast<int>(ext->size());
        if (l.hi < l.lo) throw std::runtime_error("empty integer range for '" + d.name + "'");
        l.value_decode = *ext;
      }
      for (const auto& dim : d.dims) {
        std::vector<Constant> display;
        std::vector<bool> valid;
        if (const auto* ext = db_.extent(dim)) {
          display = *ext;
          valid.assign(ext->size(), true);
        } else {
          auto [lo, domain] = range_info(dim);
          const auto* ext2 = db_.extent(domain);
          if (!ext2) throw std::runtime_error("unknown domain '" + domain + "'");
          for (int code = lo; code <= static_cast<int>(ext2->size()); ++code) {
            if (code == 0) {
              display.push_back(int_const(0));
              valid.push_back(false);
            } else {
              display.push_back((*ext2)[static_cast<std::size_t>(code - 1)]);
              valid.push_back(true);
            }
          }
        }
        l.dim_display.push_back(std::move(display));
        l.dim_valid.push_back(std::move(valid));
      }
      l.cell_base = out_.total_cells;
      out_.total_cells += static_cast<int>(l.cell_count());
      layout_index_[d.name] = static_cast<int>(out_.layouts.size());
      dim_names_[d.name] = d.dims;
      out_.layouts.push_back(std::move(l));
    }
  }

  // RangeDef lookup: lower bound and source domain of a named range.
  std::pair<int, std::string> range_info(const std::string& range) const {
    for (const auto& d : model_.decls) {
      if (d.kind != MDecl::Kind::RangeDef || d.name != range) continue;
      for (const auto& c : model_.decls)
        if (c.kind == MDecl::Kind::CardConst && c.name == d.card) return {d.lo, c.domain};
    }
    throw std::runtime_error("unknown integer range '" + range + "'");
  }

  template <class F>
  void expand_bindings(const std::vector<MBinding>& bindings, std::size_t i,
                       const std::vector<MTerm>& guard, Env& env, F&& emit) {
    if (i == bindings.size()) {
      for (const auto& g : guard) {
        GValue v = instantiate(g, env);
        if (v.kind != GValue::Kind::Int)
          throw std::runtime_error("binding guard did not fold to a constant");
        if (v.i == 0) return;
      }
      emit(env);
      return;
    }
    const MBinding& b = bindings[i];
    switch (b.kind) {
      case MBinding::Kind::Domain: {
        const auto* ext = db_.extent(b.domain);
        if (!ext) throw std::runtime_error("unknown domain '" + b.domain + "'");
        const std::string& var = b.vars.front();
        auto bound = env.find(var);
        if (bound != env.end()) {
          // Membership test of an already bound variable.
          Constant v = decode_val(bound->second, db_);
          bool in = false;
          for (const auto& c : *ext) in = in || c == v;
          if (in) expand_bindings(bindings, i + 1, guard, env, emit);
          return;
        }
        for (const auto& c : *ext) {
          env[var] = EnvVal{c, false, {}};
          expand_bindings(bindings, i + 1, guard, env, emit);
        }
        env.erase(var);
        return;
      }
      case MBinding::Kind::Tuple: {
        auto rel = db_.facts.find(b.domain);
        if (rel == db_.facts.end()) return;  // empty relation: no bindings
        for (const auto& row : rel->second.rows()) {
          if (row.size() != b.vars.size()) continue;
          std::vector<std::string> fresh;
          bool ok = true;
          for (std::size_t k = 0; k < b.vars.size() && ok; ++k) {
            const std::string& var = b.vars[k];
            auto bound = env.find(var);
            if (bound != env.end()) {
              ok = decode_val(bound->second, db_) == row[k];
            } else {
              env[var] = EnvVal{row[k], false, {}};
              fresh.push_back(var);
            }
          }
          if (ok) expand_bindings(bindings, i + 1, guard, env, emit);
          for (const auto& v : fresh) env.erase(v);
        }
        return;
      }
      case MBinding::Kind::IntRange: {
        const auto* ext = db_.extent(b.domain);
        if (!ext) throw std::runtime_error("unknown domain '" + b.domain + "'");
        int hi = static_cast<int>(ext->size());
        if (hi < b.lo) throw std::runtime_error("empty integer range over '" + b.domain + "'");
        const std::string& var = b.vars.front();
        auto bound = env.find(var);
        if (bound != env.end()) {
          std::int64_t code = std::get<std::int64_t>(bound->second.value);
          if (code >= b.lo && code <= hi) expand_bindings(bindings, i + 1, guard, env, emit);
          return;
        }
        for (int code = b.lo; code <= hi; ++code) {
          env[var] = EnvVal{int_const(code), true, b.domain};
          expand_bindings(bindings, i + 1, guard, env, emit);
        }
        env.erase(var);
        return;
      }
    }
  }

  int add_node(GroundModel::Node n) {
    out_.nodes.push_back(std::move(n));
    return static_cast<int>(out_.nodes.size()) - 1;
  }

  int as_node(const GValue& v) {
    if (v.kind == GValue::Kind::Node) return v.node;
    if (v.kind == GValue::Kind::Str)
      throw std::runtime_error("symbolic constant outside a comparison");
    GroundModel::Node n;
    n.kind = GroundModel::Node::Kind::Lit;
    n.value = v.i;
    return add_node(std::move(n));
  }

  static GValue g_int(std::int64_t v) { return GValue{GValue::Kind::Int, v, {}, -1}; }

  GValue g_const(const Constant& c) {
    if (std::holds_alternative<std::int64_t>(c)) return g_int(std::get<std::int64_t>(c));
    GValue v;
    v.kind = GValue::Kind::Str;
    v.s = std::get<std::string>(c);
    return v;
  }

  GValue instantiate(const MTerm& t, Env& env) {
    switch (t.kind) {
      case MTerm::Kind::IntLit: return g_int(t.value);
      case MTerm::Kind::StrLit: {
        GValue v;
        v.kind = GValue::Kind::Str;
        v.s = t.text;
        return v;
      }
      case MTerm::Kind::False: return g_int(0);
      case MTerm::Kind::VarRef: {
        auto it = env.find(t.text);
        if (it == env.end())
          throw std::runtime_error("unbound variable '" + t.text + "' while grounding");
        return g_const(it->second.value);  // codes stay codes here
      }
      case MTerm::Kind::Decode: {
        GValue inner = instantiate(t.args[0], env);
        if (inner.kind != GValue::Kind::Int)
          throw std::runtime_error("decode of a non-integer code");
        EnvVal v{int_const(inner.i), true, t.text};
        return g_const(decode_val(v, db_));
      }
      case MTerm::Kind::Encode: {
        GValue inner = instantiate(t.args[0], env);
        Constant c = inner.kind == GValue::Kind::Int ? int_const(inner.i) : str_const(inner.s);
        return g_int(db_.code_of(t.text, c));  // 0 when the value is absent
      }
      case MTerm::Kind::ArrayAccess: return instantiate_access(t, env);
      case MTerm::Kind::Sum: {
        std::int64_t const_part = 0;
        std::vector<int> kids;
        Env local = env;
        expand_bindings(t.bindings, 0, t.guard, local, [&](Env& e) {
          GValue v = instantiate(t.args[0], e);
          if (v.kind == GValue::Kind::Int)
            const_part += v.i;
          else
            kids.push_back(as_node(v));
        });
        if (kids.empty()) return g_int(const_part);
        if (const_part != 0) {
          GroundModel::Node lit;
          lit.kind = GroundModel::Node::Kind::Lit;
          lit.value = const_part;
          kids.push_back(add_node(std::move(lit)));
        }
        if (kids.size() == 1) return GValue{GValue::Kind::Node, 0, {}, kids.front()};
        GroundModel::Node n;
        n.kind = GroundModel::Node::Kind::Add;
        n.kids = std::move(kids);
        return GValue{GValue::Kind::Node, 0, {}, add_node(std::move(n))};
      }
      case MTerm::Kind::Add: {
        std::int64_t const_part = 0;
        std::vector<int> kids;
        for (const auto& a : t.args) {
          GValue v = instantiate(a, env);
          if (v.kind == GValue::Kind::Int)
            const_part += v.i;
          else
            kids.push_back(as_node(v));
        }
        if (kids.empty()) return g_int(const_part);
        if (const_part != 0) {
          GroundModel::Node lit;
          lit.kind = GroundModel::Node::Kind::Lit;
          lit.value = const_part;
          kids.push_back(add_node(std::move(lit)));
        }
        if (kids.size() == 1) return GValue{GValue::Kind::Node, 0, {}, kids.front()};
        GroundModel::Node n;
        n.kind = GroundModel::Node::Kind::Add;
        n.kids = std::move(kids);
        return GValue{GValue::Kind::Node, 0, {}, add_node(std::move(n))};
      }
      case MTerm::Kind::Mul: {
        std::int64_t const_part = 1;
        std::vector<int> kids;
        for (const auto& a : t.args) {
          GValue v = instantiate(a, env);
          if (v.kind == GValue::Kind::Int) {
            if (v.i == 0) return g_int(0);
            const_part *= v.i;
          } else {
            kids.push_back(as_node(v));
          }
        }
        if (kids.empty()) return g_int(const_part);
        if (const_part != 1) {
          GroundModel::Node lit;
          lit.kind = GroundModel::Node::Kind::Lit;
          lit.value = const_part;
          kids.push_back(add_node(std::move(lit)));
        }
        if (kids.size() == 1) return GValue{GValue::Kind::Node, 0, {}, kids.front()};
        GroundModel::Node n;
        n.kind = GroundModel::Node::Kind::Mul;
        n.kids = std::move(kids);
        return GValue{GValue::Kind::Node, 0, {}, add_node(std::move(n))};
      }
      case MTerm::Kind::Sub: {
        GValue a = instantiate(t.args[0], env);
        GValue b = instantiate(t.args[1], env);
        if (a.kind == GValue::Kind::Int && b.kind == GValue::Kind::Int)
          return g_int(a.i - b.i);
        GroundModel::Node n;
        n.kind = GroundModel::Node::Kind::Sub;
        n.kids = {as_node(a), as_node(b)};
        return GValue{GValue::Kind::Node, 0, {}, add_node(std::move(n))};
      }
      case MTerm::Kind::Compare: {
        GValue a = instantiate(t.args[0], env);
        GValue b = instantiate(t.args[1], env);
        if (a.kind != GValue::Kind::Node && b.kind != GValue::Kind::Node) {
          if (a.kind == GValue::Kind::Str || b.kind == GValue::Kind::Str) {
            if (t.op != CompareOp::Eq && t.op != CompareOp::Ne)
              throw std::runtime_error("ordered comparison over symbolic constants");
            bool eq = a.kind == b.kind && (a.kind == GValue::Kind::Str ? a.s == b.s : a.i == b.i);
            return g_int((t.op == CompareOp::Eq) == eq ? 1 : 0);
          }
          bool r = false;
          switch (t.op) {
            case CompareOp::Eq: r = a.i == b.i; break;
            case CompareOp::Ne: r = a.i != b.i; break;
            case CompareOp::Lt: r = a.i < b.i; break;
            case CompareOp::Le: r = a.i <= b.i; break;
            case CompareOp::Gt: r = a.i > b.i; break;
            case CompareOp::Ge: r = a.i >= b.i; break;
          }
          return g_int(r ? 1 : 0);
        }
        GroundModel::Node n;
        n.kind = GroundModel::Node::Kind::Compare;
        n.op = t.op;
        n.kids = {as_node(a), as_node(b)};
        return GValue{GValue::Kind::Node, 0, {}, add_node(std::move(n))};
      }
    }
    return g_int(0);
  }

  GValue instantiate_access(const MTerm& t, Env& env) {
    auto li = layout_index_.find(t.text);
    if (li != layout_index_.end()) {
      const GroundModel::Layout& l = out_.layouts[li->second];
      std::vector<int> offsets;
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        int off = index_offset(t.args[i], l.dim_display[i].size(), dim_names_.at(t.text)[i], env);
        if (off < 0) return g_int(0);  // index outside the dimension: no cell
        offsets.push_back(off);
      }
      GroundModel::Node n;
      n.kind = GroundModel::Node::Kind::Cell;
      n.cell = out_.cell_of(li->second, offsets);
      return GValue{GValue::Kind::Node, 0, {}, add_node(std::move(n))};
    }
    // Known-value array: fold to 0/1 against the interpretation.
    Tuple tuple;
    for (const auto& a : t.args) {
      GValue v = instantiate(a, env);
      if (v.kind == GValue::Kind::Node)
        throw std::runtime_error("decision value used to index known array '" + t.text + "'");
      tuple.push_back(v.kind == GValue::Kind::Int ? int_const(v.i) : str_const(v.s));
    }
    return g_int(known_.contains(t.text, tuple) ? 1 : 0);
  }

  // Offset of an index term inside a dimension. Dimension semantics: named
  // domains index by extent position, ranges by integer code.
  int index_offset(const MTerm& idx, std::size_t dim_size, const std::string& dim, Env& env) {
    GValue v = instantiate(idx, env);
    if (v.kind == GValue::Kind::Node)
      throw std::runtime_error("decision value used as an array index");
    if (const auto* ext = db_.extent(dim)) {
      Constant c = v.kind == GValue::Kind::Int ? int_const(v.i) : str_const(v.s);
      for (std::size_t k = 0; k < ext->size(); ++k)
        if ((*ext)[k] == c) return static_cast<int>(k);
      return -1;
    }
    auto [lo, domain] = range_info(dim);
    (void)domain;
    if (v.kind != GValue::Kind::Int) throw std::runtime_error("non-integer range index");
    std::int64_t off = v.i - lo;
    if (off < 0 || off >= static_cast<std::int64_t>(dim_size)) return -1;
    return static_cast<int>(off);
  }

  void emit_constraint(const MConstraint& c, Env& env) {
    GValue lhs = instantiate(c.lhs, env);
    bool lhs_const = lhs.kind != GValue::Kind::Node;
    bool lhs_true = lhs_const && lhs.i != 0;

    if (c.rhs_false) {
      if (lhs_const) {
        if (lhs_true) ++out_.unsat_markers;
        return;
      }
      out_.constraints.push_back(GroundModel::Constraint{false, as_node(lhs), -1});
      return;
    }
    GValue rhs = instantiate(c.rhs, env);
    bool rhs_const = rhs.kind != GValue::Kind::Node;
    bool rhs_true = rhs_const && rhs.i != 0;

    if (lhs_const && rhs_const) {
      bool ok = c.kind == MConstraint::Kind::Iff ? lhs_true == rhs_true : (!lhs_true || rhs_true);
      if (!ok) ++out_.unsat_markers;
      return;
    }
    if (c.kind == MConstraint::Kind::Implies) {
      if (lhs_const && !lhs_true) return;  // vacuously true
      if (rhs_const && rhs_true) return;   // consequent already holds
    }
    out_.constraints.push_back(GroundModel::Constraint{c.kind == MConstraint::Kind::Iff,
                                                       as_node(lhs), as_node(rhs)});
  }

  const ConstraintModel& model_;
  const Database& db_;
  const Interpretation& known_;
  GroundModel out_;
  std::map<std::string, int> layout_index_;
  std::map<std::string, std::vector<std::string>> dim_names_;
};

}  // namespace

GroundModel ground(const ConstraintModel& m, const Database& db, const Interpretation& known) {
  return Grounder(m, db, known).run();
}

}  // namespace npdl
