#include "fairdiv/statcheck.hpp"

#include <cmath>

namespace fairdiv {

namespace {

// Kahan compensated accumulator.
struct Acc {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

void check_table(const DiscreteRV& x, const std::vector<double>& t,
                 const char* name) {
  if (static_cast<int>(t.size()) != x.size())
    throw error(std::string("statcheck: table ") + name +
                " does not match support size");
  for (int i = 1; i < x.size(); ++i)
    if (t[i] < t[i - 1])
      throw error(std::string("statcheck: table ") + name +
                  " is not nondecreasing");
}

}  // namespace

DiscreteRV::DiscreteRV(std::vector<double> support, std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
  if (support_.empty() || support_.size() != weights_.size())
    throw error("DiscreteRV: support/weights size mismatch");
  for (std::size_t i = 1; i < support_.size(); ++i)
    if (!(support_[i] > support_[i - 1]))
      throw error("DiscreteRV: support must be strictly increasing");
  Acc total;
  for (double w : weights_) {
    if (!(w > 0.0)) throw error("DiscreteRV: weights must be positive");
    total.add(w);
  }
  if (std::abs(total.sum - 1.0) > 1e-12)
    throw error("DiscreteRV: weights must sum to 1");
}

double DiscreteRV::mean() const {
  Acc a;
  for (int i = 0; i < size(); ++i) a.add(weight(i) * point(i));
  return a.sum;
}

double association_gap(const DiscreteRV& x, const std::vector<double>& f,
                       const std::vector<double>& g) {
  check_table(x, f, "f");
  check_table(x, g, "g");
  Acc efg, ef, eg;
  for (int i = 0; i < x.size(); ++i) {
    const double w = x.weight(i);
    efg.add(w * f[i] * g[i]);
    ef.add(w * f[i]);
    eg.add(w * g[i]);
  }
  return efg.sum - ef.sum * eg.sum;
}

bool strict_condition(const DiscreteRV& x, const std::vector<double>& f,
                      const std::vector<double>& g) {
  check_table(x, f, "f");
  check_table(x, g, "g");
  auto nonconstant = [&](const std::vector<double>& t) {
    for (std::size_t i = 1; i < t.size(); ++i)
      if (t[i] != t[0]) return true;
    return false;
  };
  return nonconstant(f) && nonconstant(g);
}

ConditionalMeanGap conditional_mean_gap(const DiscreteRV& d,
                                        const DiscreteRV& dp, int n,
                                        std::uint64_t state_cap) {
  if (n < 2) throw error("conditional_mean_gap: n must be >= 2");
  const std::uint64_t pair_states =
      static_cast<std::uint64_t>(d.size()) * static_cast<std::uint64_t>(dp.size());
  std::uint64_t states = 1;
  for (int i = 0; i < n; ++i) {
    if (states > state_cap / pair_states + 1)
      throw error("conditional_mean_gap: state space exceeds cap");
    states *= pair_states;
  }
  if (states > state_cap)
    throw error("conditional_mean_gap: state space exceeds cap");

  // Flatten the (X_i, Y_i) pair outcomes once.
  std::vector<double> sum_val(pair_states), x_val(pair_states), w_val(pair_states);
  {
    std::uint64_t idx = 0;
    for (int a = 0; a < d.size(); ++a)
      for (int b = 0; b < dp.size(); ++b, ++idx) {
        x_val[idx] = d.point(a);
        sum_val[idx] = d.point(a) + dp.point(b);
        w_val[idx] = d.weight(a) * dp.weight(b);
      }
  }

  Acc win_mass, win_x, lose_mass, lose_x;
  std::uint64_t win_count = 0, lose_count = 0;
  std::vector<std::uint64_t> digit(n, 0);
  for (std::uint64_t s = 0; s < states; ++s) {
    std::uint64_t rem = s;
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      digit[i] = rem % pair_states;
      rem /= pair_states;
      w *= w_val[digit[i]];
    }
    double rival_max = sum_val[digit[1]];
    for (int i = 2; i < n; ++i) rival_max = std::max(rival_max, sum_val[digit[i]]);
    if (sum_val[digit[0]] > rival_max) {
      win_mass.add(w);
      win_x.add(w * x_val[digit[0]]);
      ++win_count;
    } else {
      lose_mass.add(w);
      lose_x.add(w * x_val[digit[0]]);
      ++lose_count;
    }
  }

  if (win_count == 0 || lose_count == 0)
    throw error("conditional_mean_gap: conditioning event has probability zero");
  return {win_x.sum / win_mass.sum, lose_x.sum / lose_mass.sum};
}

}  // namespace fairdiv
