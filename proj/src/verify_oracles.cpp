#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fairdiv/verify.hpp"

namespace fairdiv {

double min_integral_max_envy(const ValuationMatrix& values) {
  const int n = values.n();
  const int m = values.m();
  double total = 1;
  for (int j = 0; j < m; ++j) total *= n;
  if (total > 2e7) throw error("min_integral_max_envy: state space too large");

  std::vector<int> owner(m, 0);
  // bundle_sum[i][a] = value agent i assigns to agent a's bundle.
  std::vector<double> bundle(static_cast<std::size_t>(n) * n, 0.0);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    std::fill(bundle.begin(), bundle.end(), 0.0);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < n; ++i) bundle[i * n + owner[j]] += values.at(i, j);
    double worst = 0.0;
    bool any = false;
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a) {
        if (i == a) continue;
        const double e = bundle[i * n + a] - bundle[i * n + i];
        if (!any || e > worst) worst = e;
        any = true;
      }
    best = std::min(best, any ? worst : 0.0);

    int j = 0;
    while (j < m && ++owner[j] == n) owner[j++] = 0;
    if (j == m) break;
  }
  return best;
}

double max_integral_welfare(const ValuationMatrix& values) {
  // Welfare separates across items, so the optimum is the sum of
  // per-item maxima.
  double total = 0.0;
  for (int j = 0; j < values.m(); ++j) {
    double best = values.at(0, j);
    for (int i = 1; i < values.n(); ++i) best = std::max(best, values.at(i, j));
    total += best;
  }
  return total;
}

namespace {

// Textbook tableau simplex over mpq_class. Bland's rule throughout, so
// termination is guaranteed and every comparison is exact.
class RationalSimplex {
 public:
  explicit RationalSimplex(const LinearProgram& lp) {
    const int rows = lp.num_rows();
    for (int v = 0; v < lp.num_vars; ++v) {
      pos_col_.push_back(cols_);
      ++cols_;
      if (lp.free_var[v]) {
        neg_col_.push_back(cols_);
        ++cols_;
      } else {
        neg_col_.push_back(-1);
      }
    }
    int extras = 0;
    for (int r = 0; r < rows; ++r)
      if (lp.senses[r] != LinearProgram::Sense::kEq) ++extras;
    const int first_extra = cols_;
    cols_ += extras;
    first_artificial_ = cols_;

    a_.assign(rows, std::vector<mpq_class>(cols_, 0));
    b_.assign(rows, 0);
    basis_.assign(rows, -1);

    int extra = first_extra;
    for (int r = 0; r < rows; ++r) {
      int sign = 1;
      auto sense = lp.senses[r];
      if (lp.rhs[r] < 0.0) {
        sign = -1;
        if (sense == LinearProgram::Sense::kLe) sense = LinearProgram::Sense::kGe;
        else if (sense == LinearProgram::Sense::kGe) sense = LinearProgram::Sense::kLe;
      }
      for (int v = 0; v < lp.num_vars; ++v) {
        mpq_class c(lp.rows[r][v]);
        c *= sign;
        a_[r][pos_col_[v]] = c;
        if (neg_col_[v] >= 0) a_[r][neg_col_[v]] = -c;
      }
      b_[r] = mpq_class(lp.rhs[r]) * sign;
      if (sense == LinearProgram::Sense::kLe) {
        a_[r][extra] = 1;
        basis_[r] = extra++;
      } else if (sense == LinearProgram::Sense::kGe) {
        a_[r][extra] = -1;
        ++extra;
      }
    }
    int artificials = 0;
    for (int r = 0; r < rows; ++r)
      if (basis_[r] < 0) ++artificials;
    const int total = cols_ + artificials;
    for (auto& row : a_) row.resize(total, mpq_class(0));
    int art = cols_;
    for (int r = 0; r < rows; ++r)
      if (basis_[r] < 0) {
        a_[r][art] = 1;
        basis_[r] = art++;
      }
    cols_ = total;
  }

  mpq_class optimize(const LinearProgram& lp) {
    if (first_artificial_ < cols_) {
      std::vector<mpq_class> phase1(cols_, 0);
      for (int c = first_artificial_; c < cols_; ++c) phase1[c] = 1;
      const mpq_class infeas = run(phase1, cols_);
      if (infeas != 0) throw error("rational simplex: infeasible");
      for (int r = 0; r < static_cast<int>(a_.size()); ++r) {
        if (basis_[r] < first_artificial_) continue;
        for (int c = 0; c < first_artificial_; ++c)
          if (a_[r][c] != 0) {
            pivot(r, c);
            basis_[r] = c;
            break;
          }
      }
    }
    std::vector<mpq_class> cost(cols_, 0);
    for (int v = 0; v < lp.num_vars; ++v) {
      cost[pos_col_[v]] = mpq_class(lp.objective[v]);
      if (neg_col_[v] >= 0) cost[neg_col_[v]] = -mpq_class(lp.objective[v]);
    }
    return run(cost, first_artificial_);
  }

 private:
  mpq_class run(const std::vector<mpq_class>& cost, int col_limit) {
    const int rows = static_cast<int>(a_.size());
    std::vector<mpq_class> d = cost;
    for (int r = 0; r < rows; ++r) {
      const mpq_class& cb = cost[basis_[r]];
      if (cb == 0) continue;
      for (int c = 0; c < cols_; ++c) d[c] -= cb * a_[r][c];
    }
    for (;;) {
      int enter = -1;
      for (int c = 0; c < col_limit; ++c)
        if (d[c] < 0) { enter = c; break; }
      if (enter < 0) {
        mpq_class obj = 0;
        for (int r = 0; r < rows; ++r) obj += cost[basis_[r]] * b_[r];
        return obj;
      }

      int leave = -1;
      mpq_class best_ratio;
      for (int r = 0; r < rows; ++r) {
        if (a_[r][enter] <= 0) continue;
        mpq_class ratio = b_[r] / a_[r][enter];
        if (leave < 0 || ratio < best_ratio ||
            (ratio == best_ratio && basis_[r] < basis_[leave])) {
          leave = r;
          best_ratio = ratio;
        }
      }
      if (leave < 0) throw error("rational simplex: unbounded");
      pivot(leave, enter);
      basis_[leave] = enter;
      const mpq_class de = d[enter];
      if (de != 0)
        for (int c = 0; c < cols_; ++c) d[c] -= de * a_[leave][c];
    }
  }

  void pivot(int prow, int pcol) {
    const mpq_class inv = 1 / a_[prow][pcol];
    for (int c = 0; c < cols_; ++c) a_[prow][c] *= inv;
    b_[prow] *= inv;
    for (int r = 0; r < static_cast<int>(a_.size()); ++r) {
      if (r == prow) continue;
      const mpq_class f = a_[r][pcol];
      if (f == 0) continue;
      for (int c = 0; c < cols_; ++c) a_[r][c] -= f * a_[prow][c];
      b_[r] -= f * b_[prow];
    }
  }

  int cols_ = 0;
  int first_artificial_ = 0;
  std::vector<int> pos_col_;
  std::vector<int> neg_col_;
  std::vector<std::vector<mpq_class>> a_;
  std::vector<mpq_class> b_;
  std::vector<int> basis_;
};

}  // namespace

double exact_lp_optimum(const LinearProgram& lp) {
  RationalSimplex solver(lp);
  return solver.optimize(lp).get_d();
}

}  // namespace fairdiv
