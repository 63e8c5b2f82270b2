#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fairdiv/core.hpp"

namespace fairdiv {

// Finite random variable: strictly increasing support with positive
// weights summing to one. Carrier for the exact enumeration oracles.
class DiscreteRV {
 public:
  DiscreteRV(std::vector<double> support, std::vector<double> weights);

  int size() const { return static_cast<int>(support_.size()); }
  double point(int i) const { return support_[i]; }
  double weight(int i) const { return weights_[i]; }

  double mean() const;
  // Exact boolean: positive variance iff the support of a non-constant
  // value set is hit with positive weight (all weights are positive, so
  // this is just "more than one distinct value").
  bool has_positive_variance() const { return size() > 1; }

 private:
  std::vector<double> support_;
  std::vector<double> weights_;
};

// E[f(X) g(X)] - E[f(X)] E[g(X)] by exact enumeration; f and g are given
// as value tables over X's support and must be nondecreasing.
double association_gap(const DiscreteRV& x, const std::vector<double>& f,
                       const std::vector<double>& g);

// True iff Var(f(X)) > 0 and Var(g(X)) > 0 (exact table comparisons).
bool strict_condition(const DiscreteRV& x, const std::vector<double>& f,
                      const std::vector<double>& g);

struct ConditionalMeanGap {
  double mean_win;   // E[X_1 | X_1 + Y_1 >  max_{i>=2} X_i + Y_i]
  double mean_lose;  // E[X_1 | X_1 + Y_1 <= max_{i>=2} X_i + Y_i]
};

// Exact enumeration over all (|supp D| * |supp Dp|)^n joint outcomes with
// X_i ~ D, Y_i ~ Dp independent. Ties count toward the losing side.
// Errors when either conditioning event has probability zero or the state
// space exceeds the cap.
ConditionalMeanGap conditional_mean_gap(const DiscreteRV& d,
                                        const DiscreteRV& dp, int n,
                                        std::uint64_t state_cap = 10'000'000);

}  // namespace fairdiv
