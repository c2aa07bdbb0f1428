#include "npdl/solver.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace npdl {

namespace {

struct Interval {
  std::int64_t lo = 0, hi = 0;
  bool definitely_true() const { return lo > 0 || hi < 0; }
  bool definitely_false() const { return lo == 0 && hi == 0; }
};

class Search {
 public:
  Search(const GroundModel& g, const SolveLimits& limits) : g_(g), limits_(limits) {
    values_.assign(static_cast<std::size_t>(g.total_cells), 0);
    assigned_.assign(static_cast<std::size_t>(g.total_cells), false);
    watch_.assign(static_cast<std::size_t>(g.total_cells), {});
    for (std::size_t ci = 0; ci < g.constraints.size(); ++ci) {
      std::set<int> cells;
      collect_cells(g.constraints[ci].lhs, cells);
      if (g.constraints[ci].rhs >= 0) collect_cells(g.constraints[ci].rhs, cells);
      for (int c : cells) watch_[static_cast<std::size_t>(c)].push_back(static_cast<int>(ci));
      if (cells.empty() && violated(static_cast<int>(ci))) ++static_markers_;
    }
    start_ = std::chrono::steady_clock::now();
  }

  // Enumerates solutions in search order; `emit` returns false to stop.
  void enumerate(const std::function<bool(const std::vector<int>&)>& emit, SolveStatus* status,
                 bool optimize, bool maximize) {
    *status = SolveStatus::Done;
    if (g_.unsat_markers > 0 || static_markers_ > 0) return;
    optimize_ = optimize;
    maximize_ = maximize;
    stopped_ = false;
    status_ = SolveStatus::Done;
    emit_ = &emit;
    descend(0);
    *status = status_;
  }

  std::optional<std::int64_t> incumbent() const { return incumbent_; }

 private:
  void collect_cells(int node, std::set<int>& out) const {
    const auto& n = g_.nodes[static_cast<std::size_t>(node)];
    if (n.kind == GroundModel::Node::Kind::Cell) out.insert(n.cell);
    for (int k : n.kids) collect_cells(k, out);
  }

  Interval eval(int node) const {
    const auto& n = g_.nodes[static_cast<std::size_t>(node)];
    switch (n.kind) {
      case GroundModel::Node::Kind::Lit: return {n.value, n.value};
      case GroundModel::Node::Kind::Cell: {
        if (assigned_[static_cast<std::size_t>(n.cell)]) {
          std::int64_t v = values_[static_cast<std::size_t>(n.cell)];
          return {v, v};
        }
        return {g_.cell_lo(n.cell), g_.cell_hi(n.cell)};
      }
      case GroundModel::Node::Kind::Add: {
        Interval acc{0, 0};
        for (int k : n.kids) {
          Interval i = eval(k);
          acc.lo += i.lo;
          acc.hi += i.hi;
        }
        return acc;
      }
      case GroundModel::Node::Kind::Sub: {
        Interval a = eval(n.kids[0]);
        Interval b = eval(n.kids[1]);
        return {a.lo - b.hi, a.hi - b.lo};
      }
      case GroundModel::Node::Kind::Mul: {
        Interval acc{1, 1};
        for (int k : n.kids) {
          Interval i = eval(k);
          std::int64_t c[4] = {acc.lo * i.lo, acc.lo * i.hi, acc.hi * i.lo, acc.hi * i.hi};
          acc.lo = *std::min_element(c, c + 4);
          acc.hi = *std::max_element(c, c + 4);
        }
        return acc;
      }
      case GroundModel::Node::Kind::Compare: {
        Interval a = eval(n.kids[0]);
        Interval b = eval(n.kids[1]);
        auto yes = [] { return Interval{1, 1}; };
        auto no = [] { return Interval{0, 0}; };
        auto maybe = [] { return Interval{0, 1}; };
        switch (n.op) {
          case CompareOp::Eq:
            if (a.lo == a.hi && b.lo == b.hi) return a.lo == b.lo ? yes() : no();
            if (a.hi < b.lo || b.hi < a.lo) return no();
            return maybe();
          case CompareOp::Ne:
            if (a.lo == a.hi && b.lo == b.hi) return a.lo != b.lo ? yes() : no();
            if (a.hi < b.lo || b.hi < a.lo) return yes();
            return maybe();
          case CompareOp::Lt:
            if (a.hi < b.lo) return yes();
            if (a.lo >= b.hi) return no();
            return maybe();
          case CompareOp::Le:
            if (a.hi <= b.lo) return yes();
            if (a.lo > b.hi) return no();
            return maybe();
          case CompareOp::Gt:
            if (a.lo > b.hi) return yes();
            if (a.hi <= b.lo) return no();
            return maybe();
          case CompareOp::Ge:
            if (a.lo >= b.hi) return yes();
            if (a.hi < b.lo) return no();
            return maybe();
        }
        return maybe();
      }
    }
    return {0, 0};
  }

  bool violated(int ci) const {
    const auto& c = g_.constraints[static_cast<std::size_t>(ci)];
    Interval lhs = eval(c.lhs);
    if (c.rhs < 0) return lhs.definitely_true();
    Interval rhs = eval(c.rhs);
    if (c.iff)
      return (lhs.definitely_true() && rhs.definitely_false()) ||
             (lhs.definitely_false() && rhs.definitely_true());
    return lhs.definitely_true() && rhs.definitely_false();
  }

  bool objective_pruned() const {
    if (!optimize_ || !incumbent_) return false;
    std::int64_t bound = 0;
    for (int node : g_.objective_nodes) bound += maximize_ ? eval(node).hi : eval(node).lo;
    return maximize_ ? bound <= *incumbent_ : bound >= *incumbent_;
  }

  bool out_of_budget() {
    if (limits_.node_limit >= 0 && nodes_ > limits_.node_limit) return true;
    if (limits_.time_limit_s >= 0 && (nodes_ & 1023) == 0) {
      std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
      if (dt.count() > limits_.time_limit_s) return true;
    }
    return false;
  }

  void descend(int cell) {
    if (stopped_) return;
    if (cell == g_.total_cells) {
      if (optimize_) {
        std::int64_t obj = 0;
        for (int node : g_.objective_nodes) obj += eval(node).lo;
        incumbent_ = obj;
      }
      if (!(*emit_)(values_)) stopped_ = true;
      return;
    }
    ++nodes_;
    if (out_of_budget()) {
      status_ = SolveStatus::ResourceLimit;
      stopped_ = true;
      return;
    }
    for (int v = g_.cell_lo(cell); v <= g_.cell_hi(cell) && !stopped_; ++v) {
      values_[static_cast<std::size_t>(cell)] = v;
      assigned_[static_cast<std::size_t>(cell)] = true;
      bool ok = true;
      for (int ci : watch_[static_cast<std::size_t>(cell)])
        if (violated(ci)) {
          ok = false;
          break;
        }
      if (ok && objective_pruned()) ok = false;
      if (ok) descend(cell + 1);
      assigned_[static_cast<std::size_t>(cell)] = false;
    }
  }

  const GroundModel& g_;
  SolveLimits limits_;
  std::vector<int> values_;
  std::vector<bool> assigned_;
  std::vector<std::vector<int>> watch_;
  int static_markers_ = 0;
  bool optimize_ = false;
  bool maximize_ = false;
  bool stopped_ = false;
  std::optional<std::int64_t> incumbent_;
  long long nodes_ = 0;
  SolveStatus status_ = SolveStatus::Done;
  const std::function<bool(const std::vector<int>&)>* emit_ = nullptr;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

std::int64_t eval_node(const GroundModel& g, int node, const std::vector<int>& values) {
  const auto& n = g.nodes[static_cast<std::size_t>(node)];
  switch (n.kind) {
    case GroundModel::Node::Kind::Lit: return n.value;
    case GroundModel::Node::Kind::Cell: return values[static_cast<std::size_t>(n.cell)];
    case GroundModel::Node::Kind::Add: {
      std::int64_t acc = 0;
      for (int k : n.kids) acc += eval_node(g, k, values);
      return acc;
    }
    case GroundModel::Node::Kind::Sub:
      return eval_node(g, n.kids[0], values) - eval_node(g, n.kids[1], values);
    case GroundModel::Node::Kind::Mul: {
      std::int64_t acc = 1;
      for (int k : n.kids) acc *= eval_node(g, k, values);
      return acc;
    }
    case GroundModel::Node::Kind::Compare: {
      std::int64_t a = eval_node(g, n.kids[0], values);
      std::int64_t b = eval_node(g, n.kids[1], values);
      switch (n.op) {
        case CompareOp::Eq: return a == b;
        case CompareOp::Ne: return a != b;
        case CompareOp::Lt: return a < b;
        case CompareOp::Le: return a <= b;
        case CompareOp::Gt: return a > b;
        case CompareOp::Ge: return a >= b;
      }
      return 0;
    }
  }
  return 0;
}

bool check_solution(const GroundModel& g, const std::vector<int>& values) {
  if (g.unsat_markers > 0) return false;
  for (const auto& c : g.constraints) {
    bool lhs = eval_node(g, c.lhs, values) != 0;
    if (c.rhs < 0) {
      if (lhs) return false;
      continue;
    }
    bool rhs = eval_node(g, c.rhs, values) != 0;
    if (c.iff ? lhs != rhs : (lhs && !rhs)) return false;
  }
  return true;
}

void solve_enumerate(const GroundModel& g, const SolveLimits& limits,
                     const std::function<bool(const Solution&)>& on_solution,
                     SolveStatus* status) {
  Search search(g, limits);
  search.enumerate(
      [&](const std::vector<int>& values) {
        Solution s;
        s.values = values;
        if (g.has_objective) {
          std::int64_t obj = 0;
          for (int node : g.objective_nodes) obj += eval_node(g, node, values);
          s.objective = obj;
        }
        return on_solution(s);
      },
      status, /*optimize=*/false, /*maximize=*/false);
}

SolveResult solve(const GroundModel& g, SolveMode mode, const SolveLimits& limits) {
  SolveResult res;
  switch (mode) {
    case SolveMode::First: {
      solve_enumerate(
          g, limits,
          [&](const Solution& s) {
            res.solutions.push_back(s);
            return false;
          },
          &res.status);
      return res;
    }
    case SolveMode::All: {
      solve_enumerate(
          g, limits,
          [&](const Solution& s) {
            res.solutions.push_back(s);
            return true;
          },
          &res.status);
      return res;
    }
    case SolveMode::Optimize: {
      Search search(g, limits);
      std::vector<int> best;
      search.enumerate(
          [&](const std::vector<int>& values) {
            best = values;  // each emitted assignment improves or first-ties
            return true;
          },
          &res.status, /*optimize=*/true, g.maximize);
      if (!best.empty() || (g.total_cells == 0 && search.incumbent())) {
        Solution s;
        s.values = best;
        s.objective = search.incumbent();
        res.solutions.push_back(std::move(s));
      }
      return res;
    }
  }
  return res;
}

std::set<Tuple> extract_answer(const GroundModel& g, const Solution& s, const Atom& goal) {
  std::set<Tuple> out;
  for (const auto& l : g.layouts) {
    if (l.name != goal.pred) continue;
    std::size_t count = l.cell_count();
    for (std::size_t k = 0; k < count; ++k) {
      int value = s.values[static_cast<std::size_t>(l.cell_base) + k];
      if (value == 0 && !l.is_bool && l.lo == 0) continue;
      if (l.is_bool && value == 0) continue;

      // Row-major offset back to per-dimension indices.
      std::vector<std::size_t> offs(l.dim_display.size());
      std::size_t rem = k;
      for (std::size_t d = l.dim_display.size(); d-- > 0;) {
        offs[d] = rem % l.dim_display[d].size();
        rem /= l.dim_display[d].size();
      }
      Tuple tuple;
      bool valid = true;
      for (std::size_t d = 0; d < offs.size(); ++d) {
        valid = valid && l.dim_valid[d][offs[d]];
        tuple.push_back(l.dim_display[d][offs[d]]);
      }
      if (!l.is_bool) {
        if (value < 1 || value > static_cast<int>(l.value_decode.size())) continue;
        tuple.push_back(l.value_decode[static_cast<std::size_t>(value - 1)]);
      }
      if (!valid) continue;

      // Match the goal pattern: constants filter, repeated variables agree.
      if (tuple.size() != goal.args.size()) continue;
      std::map<std::string, Constant> binding;
      bool match = true;
      for (std::size_t d = 0; d < tuple.size() && match; ++d) {
        const Term& t = goal.args[d];
        if (t.is_var()) {
          auto [it, fresh] = binding.emplace(t.var, tuple[d]);
          match = fresh || it->second == tuple[d];
        } else {
          match = t.value == tuple[d];
        }
      }
      if (match) out.insert(std::move(tuple));
    }
  }
  return out;
}

}  // namespace npdl
