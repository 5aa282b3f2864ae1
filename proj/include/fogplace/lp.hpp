#pragma once

// Dense-tableau dual simplex for boxed linear programs
//
//   minimise c'x  subject to  A x (<= | =) b,  l <= x <= u
//
// Every structural column must have finite bounds. With boxed columns any
// basis can be made dual feasible by parking each nonbasic column at the
// bound matching the sign of its reduced cost, so the solver never needs a
// phase one: it starts from the slack basis and re-optimises in place after
// bound changes or appended rows, which is what branch-and-bound does.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fogplace::lp {

enum class Sense { less_equal, equal, greater_equal };

struct Term {
  int col;
  double coef;
};

struct Row {
  std::vector<Term> terms;
  Sense sense = Sense::less_equal;
  double rhs = 0.0;
};

struct Model {
  std::vector<double> cost, lower, upper;
  std::vector<Row> rows;

  int add_col(double c, double lo, double hi) {
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    return static_cast<int>(cost.size()) - 1;
  }
  int add_row(std::vector<Term> terms, Sense sense, double rhs) {
    rows.push_back({std::move(terms), sense, rhs});
    return static_cast<int>(rows.size()) - 1;
  }
  int cols() const { return static_cast<int>(cost.size()); }
};

enum class Status { optimal, infeasible, iteration_limit };

struct Tolerances {
  double primal = 1e-9;
  double dual = 1e-9;
  double pivot = 1e-9;
};

class DualSimplex {
 public:
  explicit DualSimplex(const Model& model, Tolerances tol = {})
      : n_(model.cols()), cost_(model.cost), lower_(model.lower), upper_(model.upper), tol_(tol) {
    for (int j = 0; j < n_; ++j) {
      if (!std::isfinite(lower_[j]) || !std::isfinite(upper_[j]))
        throw std::invalid_argument("column " + std::to_string(j) + " is not boxed");
      if (lower_[j] > upper_[j]) throw std::invalid_argument("column " + std::to_string(j) + " has lo > hi");
    }
    x_.assign(n_, 0.0);
    status_.assign(n_, kAtLower);
    d_ = cost_;
    for (const auto& r : model.rows) append_row(r);
    for (int j = 0; j < n_; ++j) park(j);
  }

  int cols() const { return n_; }
  int rows() const { return static_cast<int>(rows_.size()); }
  std::size_t pivots() const { return pivots_; }

  double lower(int j) const { return lower_[j]; }
  double upper(int j) const { return upper_[j]; }

  void set_bounds(int j, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("set_bounds: lo > hi");
    lower_[j] = lo;
    upper_[j] = hi;
  }

  /// Appends a row to the current basis; its slack enters as basic.
  int add_row(const Row& r) {
    append_row(r);
    return rows() - 1;
  }

  Status solve() {
    for (int j = 0; j < total_cols(); ++j)
      if (status_[j] != kBasic) park(j);
    recompute_basics();

    const std::size_t limit = 50 * static_cast<std::size_t>(total_cols() + rows()) + 10000;
    for (std::size_t iter = 0;; ++iter) {
      if (iter > limit) return Status::iteration_limit;
      if (since_refactor_ >= kRefactorInterval) refactor();

      const int r = leaving_row();
      if (r < 0) {
        if (residual() > 1e-7 && !just_refactored_) {
          refactor();
          continue;
        }
        just_refactored_ = false;
        return Status::optimal;
      }
      const int leaving = head_[r];
      const bool to_lower = value(leaving) < lower_bound(leaving);
      const int entering = entering_col(r, to_lower);
      if (entering < 0) {
        if (!just_refactored_) {
          refactor();
          continue;
        }
        just_refactored_ = false;
        return Status::infeasible;
      }
      pivot(r, entering, to_lower ? lower_bound(leaving) : upper_bound(leaving), to_lower);
      just_refactored_ = false;
    }
  }

  /// Structural values of the last solve.
  std::vector<double> solution() const { return {x_.begin(), x_.begin() + n_}; }
  double value_of(int j) const { return x_[j]; }

  double objective() const {
    double z = 0.0;
    for (int j = 0; j < n_; ++j) z += cost_[j] * x_[j];
    return z;
  }

 private:
  static constexpr char kBasic = 0, kAtLower = 1, kAtUpper = 2;
  static constexpr std::size_t kRefactorInterval = 400;

  int total_cols() const { return n_ + rows(); }

  double value(int j) const { return x_[j]; }
  double lower_bound(int j) const { return j < n_ ? lower_[j] : 0.0; }
  double upper_bound(int j) const {
    if (j < n_) return upper_[j];
    return rows_[j - n_].sense == Sense::equal ? 0.0 : std::numeric_limits<double>::infinity();
  }

  // Puts a nonbasic column at the bound its reduced cost asks for.
  void park(int j) {
    const double lo = lower_bound(j), hi = upper_bound(j);
    if (d_[j] < -tol_.dual && std::isfinite(hi)) {
      status_[j] = kAtUpper;
    } else if (d_[j] > tol_.dual || !std::isfinite(hi)) {
      status_[j] = kAtLower;
    } else if (status_[j] == kBasic) {
      status_[j] = kAtLower;
    }
    x_[j] = status_[j] == kAtUpper ? hi : lo;
  }

  void append_row(const Row& in) {
    Row r = in;
    if (r.sense == Sense::greater_equal) {
      for (auto& t : r.terms) t.coef = -t.coef;
      r.rhs = -r.rhs;
      r.sense = Sense::less_equal;
    }
    for (const auto& t : r.terms)
      if (t.col < 0 || t.col >= n_) throw std::out_of_range("row references unknown column");

    // New slack column: zero in every existing row.
    for (auto& row : tab_) row.push_back(0.0);
    std::vector<double> t(total_cols() + 1, 0.0);
    for (const auto& term : r.terms) t[term.col] += term.coef;
    double beta = r.rhs;
    // Express in the current basis: eliminate basic structural columns.
    for (int i = 0; i < rows(); ++i) {
      const int k = head_[i];
      const double a = k < n_ ? t[k] : 0.0;
      if (a == 0.0) continue;
      const auto& ti = tab_[i];
      for (int j = 0; j < total_cols(); ++j) t[j] -= a * ti[j];
      beta -= a * beta_[i];
    }
    const int slack = total_cols();
    t[slack] = 1.0;
    rows_.push_back(std::move(r));
    tab_.push_back(std::move(t));
    beta_.push_back(beta);
    head_.push_back(slack);
    status_.push_back(kBasic);
    d_.push_back(0.0);
    double s = rows_.back().rhs;
    for (const auto& term : rows_.back().terms) s -= term.coef * x_[term.col];
    x_.push_back(s);
  }

  void recompute_basics() {
    const int m = rows(), N = total_cols();
    for (int i = 0; i < m; ++i) {
      double v = beta_[i];
      const auto& ti = tab_[i];
      for (int j = 0; j < N; ++j)
        if (status_[j] != kBasic && ti[j] != 0.0) v -= ti[j] * x_[j];
      x_[head_[i]] = v;
    }
  }

  int leaving_row() const {
    int best = -1;
    double worst = 0.0;
    for (int i = 0; i < rows(); ++i) {
      const int k = head_[i];
      const double lo = lower_bound(k), hi = upper_bound(k), v = x_[k];
      double viol = 0.0;
      if (v < lo - tol_.primal * (1.0 + std::abs(lo))) viol = lo - v;
      else if (v > hi + tol_.primal * (1.0 + std::abs(hi))) viol = v - hi;
      if (viol > worst) {
        worst = viol;
        best = i;
      }
    }
    return best;
  }

  // Harris two-pass ratio test on row r.
  int entering_col(int r, bool to_lower) const {
    const auto& tr = tab_[r];
    const int N = total_cols();
    auto eligible = [&](int j) -> bool {
      if (status_[j] == kBasic) return false;
      if (lower_bound(j) == upper_bound(j)) return false;
      const double a = tr[j];
      if (std::abs(a) <= tol_.pivot) return false;
      const bool up = status_[j] == kAtLower;
      // to_lower: the leaving value must increase.
      return to_lower ? (up ? a < 0.0 : a > 0.0) : (up ? a > 0.0 : a < 0.0);
    };
    double bound = std::numeric_limits<double>::infinity();
    for (int j = 0; j < N; ++j) {
      if (!eligible(j)) continue;
      bound = std::min(bound, (std::abs(d_[j]) + tol_.dual) / std::abs(tr[j]));
    }
    int best = -1;
    double best_a = 0.0;
    for (int j = 0; j < N; ++j) {
      if (!eligible(j)) continue;
      if (std::abs(d_[j]) / std::abs(tr[j]) <= bound && std::abs(tr[j]) > best_a) {
        best_a = std::abs(tr[j]);
        best = j;
      }
    }
    return best;
  }

  void pivot(int r, int q, double target, bool to_lower) {
    const int leaving = head_[r];
    const int m = rows(), N = total_cols();
    auto& tr = tab_[r];
    const double a = tr[q];

    const double step = (x_[leaving] - target) / a;
    for (int i = 0; i < m; ++i) {
      const double t = tab_[i][q];
      if (t != 0.0) x_[head_[i]] -= t * step;
    }
    x_[q] += step;
    x_[leaving] = target;

    const double inv = 1.0 / a;
    for (int j = 0; j < N; ++j) tr[j] *= inv;
    beta_[r] *= inv;
    tr[q] = 1.0;
    for (int i = 0; i < m; ++i) {
      if (i == r) continue;
      auto& ti = tab_[i];
      const double f = ti[q];
      if (f == 0.0) continue;
      for (int j = 0; j < N; ++j)
        if (tr[j] != 0.0) ti[j] -= f * tr[j];
      ti[q] = 0.0;
      beta_[i] -= f * beta_[r];
    }
    const double dq = d_[q];
    if (dq != 0.0) {
      for (int j = 0; j < N; ++j)
        if (tr[j] != 0.0) d_[j] -= dq * tr[j];
    }
    d_[q] = 0.0;

    head_[r] = q;
    status_[q] = kBasic;
    status_[leaving] = to_lower ? kAtLower : kAtUpper;
    ++pivots_;
    ++since_refactor_;
  }

  // Rebuilds B^-1 [A | I], B^-1 b and the reduced costs from the original rows.
  void refactor() {
    const int m = rows(), N = total_cols();
    std::vector<std::vector<double>> t(m, std::vector<double>(N, 0.0));
    std::vector<double> beta(m);
    for (int i = 0; i < m; ++i) {
      for (const auto& term : rows_[i].terms) t[i][term.col] += term.coef;
      t[i][n_ + i] = 1.0;
      beta[i] = rows_[i].rhs;
    }
    std::vector<int> basics = head_;
    std::vector<char> used(m, 0);
    std::vector<int> head(m, -1);
    for (int k : basics) {
      int p = -1;
      double best = 0.0;
      for (int i = 0; i < m; ++i)
        if (!used[i] && std::abs(t[i][k]) > best) {
          best = std::abs(t[i][k]);
          p = i;
        }
      if (p < 0 || best < 1e-12) throw std::runtime_error("dual simplex: singular basis on refactor");
      used[p] = 1;
      head[p] = k;
      const double inv = 1.0 / t[p][k];
      for (int j = 0; j < N; ++j) t[p][j] *= inv;
      beta[p] *= inv;
      t[p][k] = 1.0;
      for (int i = 0; i < m; ++i) {
        if (i == p) continue;
        const double f = t[i][k];
        if (f == 0.0) continue;
        for (int j = 0; j < N; ++j)
          if (t[p][j] != 0.0) t[i][j] -= f * t[p][j];
        t[i][k] = 0.0;
        beta[i] -= f * beta[p];
      }
    }
    tab_ = std::move(t);
    beta_ = std::move(beta);
    head_ = std::move(head);
    for (int j = 0; j < N; ++j) d_[j] = j < n_ ? cost_[j] : 0.0;
    for (int i = 0; i < m; ++i) {
      const int k = head_[i];
      const double ck = k < n_ ? cost_[k] : 0.0;
      if (ck == 0.0) continue;
      for (int j = 0; j < N; ++j) d_[j] -= ck * tab_[i][j];
    }
    for (int i = 0; i < m; ++i) d_[head_[i]] = 0.0;
    for (int j = 0; j < N; ++j)
      if (status_[j] != kBasic) park(j);
    recompute_basics();
    since_refactor_ = 0;
    just_refactored_ = true;
  }

  double residual() const {
    double worst = 0.0;
    for (int i = 0; i < rows(); ++i) {
      double s = x_[n_ + i] - rows_[i].rhs;
      for (const auto& t : rows_[i].terms) s += t.coef * x_[t.col];
      worst = std::max(worst, std::abs(s) / (1.0 + std::abs(rows_[i].rhs)));
    }
    return worst;
  }

  int n_;
  std::vector<double> cost_, lower_, upper_;
  Tolerances tol_;
  std::vector<Row> rows_;
  std::vector<std::vector<double>> tab_;
  std::vector<double> beta_;
  std::vector<int> head_;
  std::vector<char> status_;
  std::vector<double> x_, d_;
  std::size_t pivots_ = 0, since_refactor_ = 0;
  bool just_refactored_ = false;
};

}  // namespace fogplace::lp
