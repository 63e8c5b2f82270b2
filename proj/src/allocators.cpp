#include "fairdiv/allocators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fairdiv {

PickOrder::PickOrder(std::vector<int> order) : order_(std::move(order)) {
  std::vector<char> seen(order_.size(), 0);
  for (int a : order_) {
    if (a < 0 || a >= static_cast<int>(order_.size()) || seen[a])
      throw error("PickOrder: not a permutation");
    seen[a] = 1;
  }
  if (order_.empty()) throw error("PickOrder: empty");
}

PickOrder PickOrder::identity(int n) {
  std::vector<int> o(n);
  std::iota(o.begin(), o.end(), 0);
  return PickOrder(std::move(o));
}

Allocation round_robin(const ValuationMatrix& estimates, const PickOrder& order) {
  if (order.n() != estimates.n()) throw error("round_robin: order/agent mismatch");
  const int n = estimates.n();
  const int m = estimates.m();
  std::vector<char> taken(m, 0);
  std::vector<std::vector<int>> bundles(n);
  for (int turn = 0; turn < m; ++turn) {
    const int agent = order.agent_at(turn);
    int best = -1;
    for (int j = 0; j < m; ++j) {
      if (taken[j]) continue;
      if (best < 0 || estimates.at(agent, j) > estimates.at(agent, best)) best = j;
    }
    taken[best] = 1;
    bundles[agent].push_back(best);
  }
  return Allocation(n, m, std::move(bundles));
}

double rr_envy_bound(int n, int m, double eps, double b) {
  if (n < 1) throw error("rr_envy_bound: n must be >= 1");
  const int per_agent_cap = (m + n - 1) / n;
  return 2.0 * eps * per_agent_cap + b;
}

Allocation welfare_max(const ValuationMatrix& estimates, Stream& rng) {
  const int n = estimates.n();
  const int m = estimates.m();
  std::vector<int> owner(m, 0);
  std::vector<int> tied;
  for (int j = 0; j < m; ++j) {
    double best = estimates.at(0, j);
    for (int i = 1; i < n; ++i) best = std::max(best, estimates.at(i, j));
    tied.clear();
    for (int i = 0; i < n; ++i)
      if (estimates.at(i, j) == best) tied.push_back(i);
    if (tied.size() == 1) {
      owner[j] = tied[0];
    } else {
      const double u = rng.next_double();
      auto idx = static_cast<std::size_t>(u * static_cast<double>(tied.size()));
      if (idx >= tied.size()) idx = tied.size() - 1;
      owner[j] = tied[idx];
    }
  }
  return Allocation::from_owners(n, owner);
}

ValuationMatrix adversarial_instance(int n, int m, double eps,
                                     const Allocation& alloc) {
  if (!(eps > 0.0 && eps <= 0.5))
    throw error("adversarial_instance: eps must lie in (0, 1/2]");
  if (alloc.n() != n || alloc.m() != m)
    throw error("adversarial_instance: allocation shape mismatch");
  if (n < 2) throw error("adversarial_instance: needs at least two agents");

  int p = 0;
  for (int i = 1; i < n; ++i)
    if (alloc.bundle(i).size() > alloc.bundle(p).size()) p = i;
  int q = (p == 0) ? 1 : 0;
  for (int i = 0; i < n; ++i) {
    if (i == p) continue;
    if (alloc.bundle(i).size() > alloc.bundle(q).size()) q = i;
  }

  std::vector<double> vals(static_cast<std::size_t>(n) * m, 0.5);
  for (int g : alloc.bundle(p)) vals[q * m + g] = 0.5 + eps;
  for (int g : alloc.bundle(q)) vals[q * m + g] = 0.5 - eps;
  return ValuationMatrix(n, m, std::move(vals), std::make_pair(0.0, 1.0));
}

}  // namespace fairdiv
