#pragma once

// Best-first branch-and-bound over the LP relaxation, with rows that may be
// generated lazily by a separation callback (globally valid cuts and model
// rows that are only added once violated).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "fogplace/lp.hpp"

namespace fogplace::milp {

struct Model {
  lp::Model lp;
  std::vector<char> integer;  // per column
  std::vector<int> priority;  // per column; higher classes are branched on first

  int add_col(double cost, double lo, double hi, bool is_integer, int branch_priority = 0) {
    integer.push_back(is_integer ? 1 : 0);
    priority.push_back(branch_priority);
    return lp.add_col(cost, lo, hi);
  }
};

struct Options {
  double integrality_tol = 1e-6;
  double relative_gap = 1e-9;
  long node_limit = 2'000'000;
  int separation_rounds = 50;
};

/// Returns rows violated by `x`; an empty result means `x` satisfies every lazy row.
using Separator = std::function<std::vector<lp::Row>(const std::vector<double>& x)>;
/// Among equal-objective integer solutions, true when `candidate` should replace `incumbent`.
using TieBreak = std::function<bool(const std::vector<double>& candidate, const std::vector<double>& incumbent)>;

enum class Status { optimal, infeasible, node_limit };

struct Result {
  Status status = Status::infeasible;
  std::vector<double> x;
  double objective = std::numeric_limits<double>::infinity();
  double best_bound = -std::numeric_limits<double>::infinity();
  long nodes = 0;
  long lazy_rows = 0;
  std::size_t lp_pivots = 0;
};

namespace detail {

struct BoundChange {
  int col;
  double lo, hi;
};

struct Node {
  double bound;
  int depth;
  std::int64_t id;
  std::vector<BoundChange> changes;
};

struct NodeOrder {
  // Lowest bound first; deeper nodes break ties, then creation order.
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

}  // namespace detail

inline Result solve(const Model& model, const Options& opt = {}, const Separator& separate = {},
                    const TieBreak& prefer = {}) {
  using detail::Node;
  lp::DualSimplex simplex(model.lp);
  const int n = model.lp.cols();
  const std::vector<double> root_lo = model.lp.lower, root_hi = model.lp.upper;

  Result res;
  auto cutoff = [&](double bound) {
    if (!std::isfinite(res.objective)) return false;
    const double tol = opt.relative_gap * std::max(1.0, std::abs(res.objective));
    // With a tie-break, subtrees that can only tie the incumbent stay open.
    if (prefer) return bound > res.objective + tol;
    return bound >= res.objective - tol;
  };

  // Solves the current LP, adding lazy rows until none is violated.
  auto solve_node = [&]() -> lp::Status {
    for (int round = 0;; ++round) {
      auto st = simplex.solve();
      if (st != lp::Status::optimal) return st;
      if (!separate) return st;
      auto x = simplex.solution();
      auto rows = separate(x);
      if (rows.empty()) return st;
      if (round >= opt.separation_rounds) {
        // Keep going only while the point is integral; a fractional point
        // can be branched on with the rows found so far.
        bool integral = true;
        for (int j = 0; j < n && integral; ++j)
          if (model.integer[j] && std::abs(x[j] - std::round(x[j])) > opt.integrality_tol) integral = false;
        if (!integral) return st;
      }
      for (const auto& r : rows) simplex.add_row(r);
      res.lazy_rows += static_cast<long>(rows.size());
    }
  };

  std::priority_queue<Node, std::vector<Node>, detail::NodeOrder> open;
  std::int64_t next_id = 0;
  open.push(Node{-std::numeric_limits<double>::infinity(), 0, next_id++, {}});

  // Until an incumbent exists the search dives depth-first, following the
  // rounding direction of the branching variable.
  std::optional<Node> dive;
  while (dive || !open.empty()) {
    if (res.nodes >= opt.node_limit) {
      res.status = Status::node_limit;
      res.best_bound = open.empty() ? dive->bound : open.top().bound;
      if (dive) res.best_bound = std::min(res.best_bound, dive->bound);
      res.lp_pivots = simplex.pivots();
      return res;
    }
    Node node;
    if (dive) {
      node = std::move(*dive);
      dive.reset();
    } else {
      node = open.top();
      open.pop();
    }
    if (cutoff(node.bound)) continue;
    ++res.nodes;

    for (int j = 0; j < n; ++j) simplex.set_bounds(j, root_lo[j], root_hi[j]);
    for (const auto& c : node.changes) simplex.set_bounds(c.col, c.lo, c.hi);

    auto st = solve_node();
    if (st == lp::Status::iteration_limit) throw std::runtime_error("branch-and-bound: LP iteration limit");
    if (st == lp::Status::infeasible) continue;
    const double obj = simplex.objective();
    if (cutoff(obj)) continue;

    const auto x = simplex.solution();
    // Most fractional column of the highest priority class, lowest index on ties.
    int branch = -1;
    double best_frac = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!model.integer[j]) continue;
      const double f = x[j] - std::floor(x[j]);
      const double dist = std::min(f, 1.0 - f);
      if (dist <= opt.integrality_tol) continue;
      if (branch < 0 || model.priority[j] > model.priority[branch] ||
          (model.priority[j] == model.priority[branch] && dist > best_frac + 1e-12)) {
        best_frac = dist;
        branch = j;
      }
    }

    if (branch < 0) {
      std::vector<double> xi = x;
      for (int j = 0; j < n; ++j)
        if (model.integer[j]) xi[j] = std::round(xi[j]);
      const double tol = opt.relative_gap * std::max(1.0, std::abs(res.objective));
      const bool first = !std::isfinite(res.objective);
      if (first || obj < res.objective - tol ||
          (obj <= res.objective + tol && prefer && prefer(xi, res.x))) {
        res.x = std::move(xi);
        res.objective = obj;
      }
      continue;
    }

    const double v = x[branch];
    const double lo = simplex.lower(branch), hi = simplex.upper(branch);
    Node down{obj, node.depth + 1, next_id++, node.changes};
    down.changes.push_back({branch, lo, std::floor(v)});
    Node up{obj, node.depth + 1, next_id++, std::move(node.changes)};
    up.changes.push_back({branch, std::ceil(v), hi});
    if (!std::isfinite(res.objective)) {
      const bool round_up = v - std::floor(v) >= 0.5;
      dive = round_up ? std::move(up) : std::move(down);
      open.push(round_up ? std::move(down) : std::move(up));
    } else {
      open.push(std::move(down));
      open.push(std::move(up));
    }
  }

  res.lp_pivots = simplex.pivots();
  if (std::isfinite(res.objective)) {
    res.status = Status::optimal;
    res.best_bound = res.objective;
  }
  return res;
}

}  // namespace fogplace::milp
