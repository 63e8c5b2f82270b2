#pragma once

#include <string>
#include <vector>

#include "fairdiv/core.hpp"
#include "fairdiv/rng.hpp"

namespace fairdiv {

// Dense minimize-form linear program. Variables are nonnegative unless
// flagged free. Carries the (n, m) shape of the envy LP it was built
// from so solutions can be mapped back to assignment matrices.
struct LinearProgram {
  enum class Sense { kLe, kGe, kEq };

  int num_vars = 0;
  std::vector<double> objective;           // minimize c^T z
  std::vector<std::vector<double>> rows;   // dense constraint rows
  std::vector<Sense> senses;
  std::vector<double> rhs;
  std::vector<char> free_var;              // 1 -> unbounded below

  int n = 0;  // agents (envy LP metadata)
  int m = 0;  // items

  int num_rows() const { return static_cast<int>(rows.size()); }
  // Plain-text standard-form listing, for cross-checking against
  // external solvers.
  std::string to_text() const;
};

// Fractional assignment: x is n x m, column-stochastic; alpha is the
// achieved max fractional envy of the LP it solves.
struct FractionalAllocation {
  int n = 0;
  int m = 0;
  std::vector<double> x;  // row-major
  double alpha = 0.0;

  double at(int agent, int item) const { return x[agent * m + item]; }
  // Checks x >= 0, column sums, and alpha >= every envy expression
  // against the matrix the LP was built from (tolerance 1e-8).
  void validate(const ValuationMatrix& estimates) const;
};

// min alpha  s.t.  sum_j v[i][j](x[i'][j] - x[i][j]) <= alpha  (i != i'),
//                  sum_i x[i][j] = 1,  x >= 0,  alpha free.
// Requires n >= 2.
LinearProgram build_minmax_envy_lp(const ValuationMatrix& estimates);

struct SimplexOptions {
  double pivot_tol = 1e-10;
  double feas_tol = 1e-8;
  double opt_tol = 1e-9;
  int max_iters = 200000;
};

// Raw two-phase dense simplex over any LinearProgram; returns the
// optimal variable vector. Throws on iteration cap or infeasibility.
std::vector<double> solve_simplex(const LinearProgram& lp,
                                  const SimplexOptions& opts = {});

// Solve the envy LP and repackage the optimum as (x*, alpha*).
FractionalAllocation solve_lp(const LinearProgram& lp,
                              const SimplexOptions& opts = {});

// Item j goes to agent i with probability x[i][j], independently across
// items; integral columns round to themselves surely.
Allocation randomized_round(const FractionalAllocation& frac, Stream& rng);

struct LpPipelineResult {
  Allocation alloc;
  FractionalAllocation frac;
  double observed_envy = 0.0;  // max envy of alloc under the estimates
  double true_envy = 0.0;      // max envy of alloc under the truth
};

// build -> solve -> round on instance.estimates. The n == 1 case skips
// the LP and hands everything to the single agent.
LpPipelineResult lp_pipeline(const NoisyInstance& instance, Stream& rng);

}  // namespace fairdiv
