#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fairdiv {

// Comparisons against zero (envy-freeness, EF1) use this absolute
// tolerance so that accumulated floating-point noise in bundle sums
// cannot flip a classification.
inline constexpr double kEnvyTol = 1e-9;

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense n x m matrix of per-agent, per-item values. Immutable after
// construction. Agents and items are 0-indexed internally; reports
// print 1-indexed.
class ValuationMatrix {
 public:
  ValuationMatrix(int n, int m, std::vector<double> values,
                  std::optional<std::pair<double, double>> range = {});

  static ValuationMatrix constant(int n, int m, double value);

  int n() const { return n_; }
  int m() const { return m_; }
  double at(int agent, int item) const { return values_[agent * m_ + item]; }
  const std::vector<double>& values() const { return values_; }

  // Largest declared absolute value; falls back to the realized one.
  double bound_b() const { return bound_b_; }
  const std::optional<std::pair<double, double>>& range() const {
    return range_;
  }

  // Additive value of a bundle for one agent.
  double bundle_value(int agent, const std::vector<int>& bundle) const;

  void write_csv(std::ostream& os) const;
  static ValuationMatrix read_csv(std::istream& is);

 private:
  int n_;
  int m_;
  std::vector<double> values_;
  std::optional<std::pair<double, double>> range_;
  double bound_b_;
};

// True values plus the estimates an algorithm actually sees, with the
// noise-model metadata (bound eps, optional per-agent shifts).
struct NoisyInstance {
  NoisyInstance(ValuationMatrix truth_, ValuationMatrix estimates_,
                double eps_, std::vector<double> shifts_ = {});

  // max_{i,j} |truth - estimates - shift_i|; must be <= eps + tol when the
  // instance was produced by a bounded noise model.
  double realized_noise_bound() const;
  void assert_bound(double tol = 1e-12) const;

  ValuationMatrix truth;
  ValuationMatrix estimates;
  double eps;
  std::vector<double> shifts;  // length n, all >= 0
};

// n-partition of the items {0..m-1}. Bundles may be empty.
class Allocation {
 public:
  Allocation(int n, int m, std::vector<std::vector<int>> bundles);

  // Build from an item -> agent map.
  static Allocation from_owners(int n, const std::vector<int>& owner);

  int n() const { return static_cast<int>(bundles_.size()); }
  int m() const { return m_; }
  const std::vector<int>& bundle(int agent) const { return bundles_[agent]; }
  const std::vector<std::vector<int>>& bundles() const { return bundles_; }

  bool operator==(const Allocation& other) const {
    return m_ == other.m_ && bundles_ == other.bundles_;
  }

 private:
  int m_;
  std::vector<std::vector<int>> bundles_;  // each sorted ascending
};

struct EnvyReport {
  int n = 0;
  std::vector<double> pairwise_envy;  // n x n, entry (i,j) = v_i(A_j) - v_i(A_i)
  double max_envy = 0.0;              // max off-diagonal entry (0 when n == 1)
  bool is_envy_free = true;           // max_envy <= kEnvyTol
  bool is_ef1 = true;

  double envy(int i, int j) const { return pairwise_envy[i * n + j]; }
};

EnvyReport envy_report(const ValuationMatrix& values, const Allocation& alloc);

// True iff every bundle size is floor(m/n) or ceil(m/n).
bool is_balanced(const Allocation& alloc, int m, int n);

}  // namespace fairdiv
