#pragma once

#include "fairdiv/core.hpp"
#include "fairdiv/rng.hpp"

namespace fairdiv {

// Fixed agent order, applied cyclically by the picking loop.
class PickOrder {
 public:
  explicit PickOrder(std::vector<int> order);
  static PickOrder identity(int n);

  int n() const { return static_cast<int>(order_.size()); }
  int agent_at(int turn) const { return order_[turn % order_.size()]; }
  const std::vector<int>& order() const { return order_; }

 private:
  std::vector<int> order_;
};

// Agents pick their highest-estimate remaining item in cyclic order.
// Ties break toward the lowest item index, so the result is a pure
// function of (estimates, order). The output is always balanced and
// EF1 with respect to the estimates.
Allocation round_robin(const ValuationMatrix& estimates, const PickOrder& order);

inline Allocation round_robin(const ValuationMatrix& estimates) {
  return round_robin(estimates, PickOrder::identity(estimates.n()));
}

// Worst-case true-envy guarantee for a balanced EF1 pick under noise
// bounded by eps with values in [0, b]: 2*eps*ceil(m/n) + b.
double rr_envy_bound(int n, int m, double eps, double b);

// Every item goes to an agent maximizing its estimated value; exact ties
// are resolved by one uniform draw from `rng` per tied item, consumed in
// item order.
Allocation welfare_max(const ValuationMatrix& estimates, Stream& rng);

// Truth matrix within eps of the all-1/2 matrix that makes the runner-up
// bundle holder envy the largest bundle holder by at least 2*eps*m/n.
// `alloc` must be what a deterministic allocator returned on all-1/2
// estimates; requires 0 < eps <= 1/2 so entries stay in [0, 1].
ValuationMatrix adversarial_instance(int n, int m, double eps,
                                     const Allocation& alloc);

}  // namespace fairdiv
