#include "fairdiv/lp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fairdiv {

namespace {

// Dense tableau simplex. Free variables are split into positive and
// negative parts; <= rows get slacks, >= rows surpluses, and equalities
// (plus any row whose slack cannot start basic) get phase-1 artificials.
// Pricing is Dantzig's rule with a switch to Bland's rule after a run of
// degenerate pivots, which restores the anti-cycling guarantee.
class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SimplexOptions& opts) : opts_(opts) {
    const int rows = lp.num_rows();

    // Column layout: split originals, then slack/surplus, then artificials.
    for (int v = 0; v < lp.num_vars; ++v) {
      col_of_var_.push_back(num_cols_);
      ++num_cols_;
      if (lp.free_var[v]) {
        neg_col_of_var_.push_back(num_cols_);
        ++num_cols_;
      } else {
        neg_col_of_var_.push_back(-1);
      }
    }
    const int first_extra = num_cols_;
    int num_extras = 0;
    for (int r = 0; r < rows; ++r)
      if (lp.senses[r] != LinearProgram::Sense::kEq) ++num_extras;
    num_cols_ += num_extras;
    first_artificial_ = num_cols_;

    a_.assign(rows, std::vector<double>(num_cols_, 0.0));
    b_.assign(rows, 0.0);
    basis_.assign(rows, -1);
    active_.assign(rows, 1);

    int extra = first_extra;
    for (int r = 0; r < rows; ++r) {
      double sign = 1.0;
      auto sense = lp.senses[r];
      if (lp.rhs[r] < 0.0) {
        sign = -1.0;
        if (sense == LinearProgram::Sense::kLe) sense = LinearProgram::Sense::kGe;
        else if (sense == LinearProgram::Sense::kGe) sense = LinearProgram::Sense::kLe;
      }
      for (int v = 0; v < lp.num_vars; ++v) {
        const double c = sign * lp.rows[r][v];
        a_[r][col_of_var_[v]] = c;
        if (neg_col_of_var_[v] >= 0) a_[r][neg_col_of_var_[v]] = -c;
      }
      b_[r] = sign * lp.rhs[r];
      if (sense == LinearProgram::Sense::kLe) {
        a_[r][extra] = 1.0;
        basis_[r] = extra++;
      } else if (sense == LinearProgram::Sense::kGe) {
        a_[r][extra] = -1.0;
        ++extra;  // surplus cannot start basic; row gets an artificial
      }
    }

    // Append one artificial column per row still lacking a basic variable.
    int artificials = 0;
    for (int r = 0; r < rows; ++r)
      if (basis_[r] < 0) ++artificials;
    const int total = num_cols_ + artificials;
    for (auto& row : a_) row.resize(total, 0.0);
    int art = num_cols_;
    for (int r = 0; r < rows; ++r) {
      if (basis_[r] < 0) {
        a_[r][art] = 1.0;
        basis_[r] = art++;
      }
    }
    num_cols_ = total;
  }

  // Minimize the given original-space objective after a phase-1 start.
  // Returns the optimal value; `solution` receives split-variable values.
  double optimize(const LinearProgram& lp, std::vector<double>& solution) {
    if (first_artificial_ < num_cols_) {
      std::vector<double> phase1_cost(num_cols_, 0.0);
      for (int c = first_artificial_; c < num_cols_; ++c) phase1_cost[c] = 1.0;
      const double infeas = run(phase1_cost, /*allow_artificial=*/true);
      if (infeas > 1e-7) throw error("simplex: infeasible program");
      expel_artificials();
    }

    std::vector<double> cost(num_cols_, 0.0);
    for (int v = 0; v < lp.num_vars; ++v) {
      cost[col_of_var_[v]] = lp.objective[v];
      if (neg_col_of_var_[v] >= 0) cost[neg_col_of_var_[v]] = -lp.objective[v];
    }
    const double obj = run(cost, /*allow_artificial=*/false);

    std::vector<double> z(num_cols_, 0.0);
    for (int r = 0; r < static_cast<int>(a_.size()); ++r)
      if (active_[r]) z[basis_[r]] = b_[r];
    solution.assign(lp.num_vars, 0.0);
    for (int v = 0; v < lp.num_vars; ++v) {
      solution[v] = z[col_of_var_[v]];
      if (neg_col_of_var_[v] >= 0) solution[v] -= z[neg_col_of_var_[v]];
    }
    return obj;
  }

 private:
  double current_objective(const std::vector<double>& cost) const {
    double obj = 0.0;
    for (int r = 0; r < static_cast<int>(a_.size()); ++r)
      if (active_[r]) obj += cost[basis_[r]] * b_[r];
    return obj;
  }

  // One simplex phase with the given cost vector. Returns the objective.
  double run(const std::vector<double>& cost, bool allow_artificial) {
    const int rows = static_cast<int>(a_.size());
    // Reduced costs: d_j = c_j - sum_r c_{B(r)} a_{r,j}.
    std::vector<double> d = cost;
    for (int r = 0; r < rows; ++r) {
      if (!active_[r]) continue;
      const double cb = cost[basis_[r]];
      if (cb == 0.0) continue;
      for (int c = 0; c < num_cols_; ++c) d[c] -= cb * a_[r][c];
    }

    const int col_limit = allow_artificial ? num_cols_ : first_artificial_;
    int degenerate_streak = 0;
    for (int iter = 0; iter < opts_.max_iters; ++iter) {
      const bool bland = degenerate_streak > 40;
      int enter = -1;
      if (bland) {
        for (int c = 0; c < col_limit; ++c)
          if (d[c] < -opts_.opt_tol) { enter = c; break; }
      } else {
        double best = -opts_.opt_tol;
        for (int c = 0; c < col_limit; ++c)
          if (d[c] < best) { best = d[c]; enter = c; }
      }
      if (enter < 0) return current_objective(cost);  // optimal

      int leave = -1;
      double best_ratio = 0.0;
      for (int r = 0; r < rows; ++r) {
        if (!active_[r]) continue;
        const double arc = a_[r][enter];
        if (arc <= opts_.pivot_tol) continue;
        const double ratio = b_[r] / arc;
        if (leave < 0 || ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && basis_[r] < basis_[leave])) {
          leave = r;
          best_ratio = ratio;
        }
      }
      if (leave < 0) throw error("simplex: unbounded program");
      if (best_ratio < 1e-12) ++degenerate_streak; else degenerate_streak = 0;

      pivot(leave, enter);
      basis_[leave] = enter;
      const double de = d[enter];
      if (de != 0.0) {
        for (int c = 0; c < num_cols_; ++c) d[c] -= de * a_[leave][c];
        d[enter] = 0.0;
      }
    }
    throw error("simplex: iteration cap reached (numerical failure)");
  }

  void pivot(int prow, int pcol) {
    const int rows = static_cast<int>(a_.size());
    const double piv = a_[prow][pcol];
    auto& prowv = a_[prow];
    const double inv = 1.0 / piv;
    for (int c = 0; c < num_cols_; ++c) prowv[c] *= inv;
    prowv[pcol] = 1.0;
    b_[prow] *= inv;
    for (int r = 0; r < rows; ++r) {
      if (r == prow || !active_[r]) continue;
      const double f = a_[r][pcol];
      if (f == 0.0) continue;
      auto& rv = a_[r];
      for (int c = 0; c < num_cols_; ++c) rv[c] -= f * prowv[c];
      rv[pcol] = 0.0;
      b_[r] -= f * b_[prow];
      if (b_[r] < 0.0 && b_[r] > -1e-12) b_[r] = 0.0;
    }
  }

  // After phase 1, basic artificials sit at zero: pivot them out on any
  // admissible column, or deactivate the (redundant) row.
  void expel_artificials() {
    const int rows = static_cast<int>(a_.size());
    for (int r = 0; r < rows; ++r) {
      if (!active_[r] || basis_[r] < first_artificial_) continue;
      int pcol = -1;
      for (int c = 0; c < first_artificial_; ++c)
        if (std::abs(a_[r][c]) > opts_.pivot_tol) { pcol = c; break; }
      if (pcol >= 0) {
        pivot(r, pcol);
        basis_[r] = pcol;
      } else {
        active_[r] = 0;
      }
    }
  }

  SimplexOptions opts_;
  int num_cols_ = 0;
  int first_artificial_ = 0;
  std::vector<int> col_of_var_;
  std::vector<int> neg_col_of_var_;
  std::vector<std::vector<double>> a_;
  std::vector<double> b_;
  std::vector<int> basis_;
  std::vector<char> active_;
};

}  // namespace

std::string LinearProgram::to_text() const {
  std::ostringstream os;
  os << "minimize";
  for (int v = 0; v < num_vars; ++v)
    if (objective[v] != 0.0) os << ' ' << objective[v] << "*z" << v;
  os << "\nsubject to\n";
  for (int r = 0; r < num_rows(); ++r) {
    bool first = true;
    for (int v = 0; v < num_vars; ++v) {
      if (rows[r][v] == 0.0) continue;
      os << (first ? "  " : " + ");
      os << rows[r][v] << "*z" << v;
      first = false;
    }
    if (first) os << "  0";
    switch (senses[r]) {
      case Sense::kLe: os << " <= "; break;
      case Sense::kGe: os << " >= "; break;
      case Sense::kEq: os << " == "; break;
    }
    os << rhs[r] << "\n";
  }
  for (int v = 0; v < num_vars; ++v)
    os << "z" << v << (free_var[v] ? " free" : " >= 0") << "\n";
  return os.str();
}

void FractionalAllocation::validate(const ValuationMatrix& estimates) const {
  if (estimates.n() != n || estimates.m() != m)
    throw error("FractionalAllocation: shape mismatch");
  for (double v : x)
    if (v < -1e-8) throw error("FractionalAllocation: negative assignment weight");
  for (int j = 0; j < m; ++j) {
    double col = 0.0;
    for (int i = 0; i < n; ++i) col += at(i, j);
    if (std::abs(col - 1.0) > 1e-8)
      throw error("FractionalAllocation: column does not sum to 1");
  }
  for (int i = 0; i < n; ++i)
    for (int ip = 0; ip < n; ++ip) {
      if (i == ip) continue;
      double envy = 0.0;
      for (int j = 0; j < m; ++j)
        envy += estimates.at(i, j) * (at(ip, j) - at(i, j));
      if (envy > alpha + 1e-8)
        throw error("FractionalAllocation: alpha under-covers an envy pair");
    }
}

LinearProgram build_minmax_envy_lp(const ValuationMatrix& estimates) {
  const int n = estimates.n();
  const int m = estimates.m();
  if (n < 2) throw error("build_minmax_envy_lp: needs n >= 2");

  LinearProgram lp;
  lp.n = n;
  lp.m = m;
  lp.num_vars = n * m + 1;
  const int alpha = n * m;
  lp.objective.assign(lp.num_vars, 0.0);
  lp.objective[alpha] = 1.0;
  lp.free_var.assign(lp.num_vars, 0);
  lp.free_var[alpha] = 1;

  for (int i = 0; i < n; ++i) {
    for (int ip = 0; ip < n; ++ip) {
      if (i == ip) continue;
      std::vector<double> row(lp.num_vars, 0.0);
      for (int j = 0; j < m; ++j) {
        row[ip * m + j] += estimates.at(i, j);
        row[i * m + j] -= estimates.at(i, j);
      }
      row[alpha] = -1.0;
      lp.rows.push_back(std::move(row));
      lp.senses.push_back(LinearProgram::Sense::kLe);
      lp.rhs.push_back(0.0);
    }
  }
  for (int j = 0; j < m; ++j) {
    std::vector<double> row(lp.num_vars, 0.0);
    for (int i = 0; i < n; ++i) row[i * m + j] = 1.0;
    lp.rows.push_back(std::move(row));
    lp.senses.push_back(LinearProgram::Sense::kEq);
    lp.rhs.push_back(1.0);
  }
  return lp;
}

std::vector<double> solve_simplex(const LinearProgram& lp,
                                  const SimplexOptions& opts) {
  Tableau tableau(lp, opts);
  std::vector<double> solution;
  tableau.optimize(lp, solution);
  return solution;
}

FractionalAllocation solve_lp(const LinearProgram& lp, const SimplexOptions& opts) {
  if (lp.n < 2 || lp.m < 0 || lp.num_vars != lp.n * lp.m + 1)
    throw error("solve_lp: program lacks envy-LP shape metadata");
  std::vector<double> z = solve_simplex(lp, opts);
  FractionalAllocation frac;
  frac.n = lp.n;
  frac.m = lp.m;
  frac.x.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(lp.n) * lp.m);
  for (double& v : frac.x)
    if (v < 0.0 && v > -1e-12) v = 0.0;
  frac.alpha = z[static_cast<std::size_t>(lp.n) * lp.m];
  return frac;
}

Allocation randomized_round(const FractionalAllocation& frac, Stream& rng) {
  std::vector<int> owner(frac.m, 0);
  for (int j = 0; j < frac.m; ++j) {
    double col = 0.0;
    for (int i = 0; i < frac.n; ++i) col += frac.at(i, j);
    if (std::abs(col - 1.0) > 1e-8)
      throw error("randomized_round: column does not sum to 1");
    const double u = rng.next_double() * col;
    double cum = 0.0;
    int pick = frac.n - 1;
    for (int i = 0; i < frac.n; ++i) {
      cum += frac.at(i, j);
      if (u < cum) { pick = i; break; }
    }
    owner[j] = pick;
  }
  return Allocation::from_owners(frac.n, owner);
}

LpPipelineResult lp_pipeline(const NoisyInstance& instance, Stream& rng) {
  const int n = instance.estimates.n();
  const int m = instance.estimates.m();
  if (n == 1) {
    std::vector<int> owner(m, 0);
    Allocation alloc = Allocation::from_owners(1, owner);
    FractionalAllocation frac;
    frac.n = 1;
    frac.m = m;
    frac.x.assign(m, 1.0);
    frac.alpha = 0.0;
    return {std::move(alloc), std::move(frac), 0.0, 0.0};
  }
  LinearProgram lp = build_minmax_envy_lp(instance.estimates);
  FractionalAllocation frac = solve_lp(lp);
  frac.validate(instance.estimates);
  Allocation alloc = randomized_round(frac, rng);
  const double observed = envy_report(instance.estimates, alloc).max_envy;
  const double truth = envy_report(instance.truth, alloc).max_envy;
  return {std::move(alloc), std::move(frac), observed, truth};
}

}  // namespace fairdiv
