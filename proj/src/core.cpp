#include "fairdiv/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

namespace fairdiv {

ValuationMatrix::ValuationMatrix(int n, int m, std::vector<double> values,
                                 std::optional<std::pair<double, double>> range)
    : n_(n), m_(m), values_(std::move(values)), range_(range) {
  if (n_ < 1 || m_ < 0) throw error("ValuationMatrix: dimensions must be positive");
  if (values_.size() != static_cast<std::size_t>(n_) * m_)
    throw error("ValuationMatrix: value buffer does not match n*m");
  double max_abs = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v)) throw error("ValuationMatrix: non-finite entry");
    max_abs = std::max(max_abs, std::abs(v));
    if (range_ && (v < range_->first || v > range_->second))
      throw error("ValuationMatrix: entry outside declared range");
  }
  bound_b_ = range_ ? std::max(std::abs(range_->first), std::abs(range_->second))
                    : max_abs;
}

ValuationMatrix ValuationMatrix::constant(int n, int m, double value) {
  return ValuationMatrix(n, m,
                         std::vector<double>(static_cast<std::size_t>(n) * m, value),
                         std::make_pair(value, value));
}

double ValuationMatrix::bundle_value(int agent, const std::vector<int>& bundle) const {
  double s = 0.0;
  for (int g : bundle) s += at(agent, g);
  return s;
}

void ValuationMatrix::write_csv(std::ostream& os) const {
  os << "agent";
  for (int j = 0; j < m_; ++j) os << ",item_" << j;
  os << "\n";
  for (int i = 0; i < n_; ++i) {
    os << (i + 1);
    for (int j = 0; j < m_; ++j) os << ',' << at(i, j);
    os << "\n";
  }
}

ValuationMatrix ValuationMatrix::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw error("valuation csv: missing header");
  std::vector<double> vals;
  int m = -1, n = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // agent label
    int cols = 0;
    while (std::getline(ss, cell, ',')) {
      vals.push_back(std::strtod(cell.c_str(), nullptr));
      ++cols;
    }
    if (m < 0) m = cols;
    if (cols != m) throw error("valuation csv: ragged rows");
    ++n;
  }
  if (n == 0) throw error("valuation csv: no rows");
  return ValuationMatrix(n, m, std::move(vals));
}

NoisyInstance::NoisyInstance(ValuationMatrix truth_, ValuationMatrix estimates_,
                             double eps_, std::vector<double> shifts_)
    : truth(std::move(truth_)),
      estimates(std::move(estimates_)),
      eps(eps_),
      shifts(std::move(shifts_)) {
  if (truth.n() != estimates.n() || truth.m() != estimates.m())
    throw error("NoisyInstance: truth/estimate shape mismatch");
  if (eps < 0.0) throw error("NoisyInstance: eps must be >= 0");
  if (shifts.empty()) shifts.assign(truth.n(), 0.0);
  if (static_cast<int>(shifts.size()) != truth.n())
    throw error("NoisyInstance: shifts length must equal agent count");
  for (double d : shifts)
    if (d < 0.0) throw error("NoisyInstance: shifts must be >= 0");
}

double NoisyInstance::realized_noise_bound() const {
  double worst = 0.0;
  for (int i = 0; i < truth.n(); ++i)
    for (int j = 0; j < truth.m(); ++j)
      worst = std::max(worst,
                       std::abs(truth.at(i, j) - estimates.at(i, j) - shifts[i]));
  return worst;
}

void NoisyInstance::assert_bound(double tol) const {
  if (realized_noise_bound() > eps + tol)
    throw error("NoisyInstance: declared noise bound violated");
}

Allocation::Allocation(int n, int m, std::vector<std::vector<int>> bundles)
    : m_(m), bundles_(std::move(bundles)) {
  if (n < 1 || m < 0) throw error("Allocation: bad dimensions");
  if (static_cast<int>(bundles_.size()) != n)
    throw error("Allocation: bundle count must equal agent count");
  std::vector<char> seen(m, 0);
  int total = 0;
  for (auto& b : bundles_) {
    std::sort(b.begin(), b.end());
    for (int g : b) {
      if (g < 0 || g >= m) throw error("Allocation: item index out of range");
      if (seen[g]) throw error("Allocation: item allocated twice");
      seen[g] = 1;
      ++total;
    }
  }
  if (total != m) throw error("Allocation: not a complete partition");
}

Allocation Allocation::from_owners(int n, const std::vector<int>& owner) {
  std::vector<std::vector<int>> bundles(n);
  for (int j = 0; j < static_cast<int>(owner.size()); ++j) {
    if (owner[j] < 0 || owner[j] >= n) throw error("Allocation: bad owner index");
    bundles[owner[j]].push_back(j);
  }
  return Allocation(n, static_cast<int>(owner.size()), std::move(bundles));
}

EnvyReport envy_report(const ValuationMatrix& values, const Allocation& alloc) {
  if (values.n() != alloc.n() || values.m() != alloc.m())
    throw error("envy_report: dimension mismatch");
  const int n = values.n();
  EnvyReport rep;
  rep.n = n;
  rep.pairwise_envy.assign(static_cast<std::size_t>(n) * n, 0.0);

  std::vector<double> own(n);
  for (int i = 0; i < n; ++i) own[i] = values.bundle_value(i, alloc.bundle(i));

  rep.max_envy = 0.0;
  bool any_pair = false;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double e = values.bundle_value(i, alloc.bundle(j)) - own[i];
      rep.pairwise_envy[i * n + j] = e;
      if (!any_pair || e > rep.max_envy) rep.max_envy = e;
      any_pair = true;
    }
  }
  if (!any_pair) rep.max_envy = 0.0;
  rep.is_envy_free = rep.max_envy <= kEnvyTol;

  // EF1: for every envied nonempty bundle, removing the best single item
  // (from i's perspective) must erase the envy.
  rep.is_ef1 = true;
  for (int i = 0; i < n && rep.is_ef1; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || alloc.bundle(j).empty()) continue;
      double best_item = alloc.bundle(j).front();
      double best_val = values.at(i, alloc.bundle(j).front());
      for (int g : alloc.bundle(j))
        if (values.at(i, g) > best_val) {
          best_val = values.at(i, g);
          best_item = g;
        }
      (void)best_item;
      const double others = values.bundle_value(i, alloc.bundle(j)) - best_val;
      if (own[i] < others - kEnvyTol) {
        rep.is_ef1 = false;
        break;
      }
    }
  }
  return rep;
}

bool is_balanced(const Allocation& alloc, int m, int n) {
  if (alloc.n() != n || alloc.m() != m) throw error("is_balanced: shape mismatch");
  const int lo = m / n;
  const int hi = (m + n - 1) / n;
  for (int i = 0; i < n; ++i) {
    const int sz = static_cast<int>(alloc.bundle(i).size());
    if (sz != lo && sz != hi) return false;
  }
  return true;
}

}  // namespace fairdiv
