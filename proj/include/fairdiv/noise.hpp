#pragma once

#include <string>
#include <vector>

#include "fairdiv/allocators.hpp"
#include "fairdiv/core.hpp"
#include "fairdiv/rng.hpp"

namespace fairdiv {

// Scalar sampling distribution. Exponential, half-normal, uniform on
// [0, c] and point masses are the monotone-hazard-rate families used by
// the sign-flipped noise model; membership is declared by family, not
// tested from samples.
struct Distribution {
  enum class Family { kUniform, kExponential, kHalfNormal, kPointMass, kDiscreteTable };

  Family family = Family::kPointMass;
  double a = 0.0;  // uniform lo / exponential mean / half-normal scale / point value
  double b = 0.0;  // uniform hi
  std::vector<double> support;  // discrete table only
  std::vector<double> weights;

  static Distribution uniform(double lo, double hi);
  static Distribution exponential(double mean);
  static Distribution half_normal(double scale);
  static Distribution point_mass(double v);
  static Distribution discrete_table(std::vector<double> support,
                                     std::vector<double> weights);

  // Spec string, e.g. "exp:0.01", "uniform:0,1", "halfnormal:0.2",
  // "point:0", "table:0,0.5,1,0.5" (value,weight pairs).
  static Distribution parse(const std::string& spec);
  std::string to_string() const;

  double mean() const;
  bool is_mhr() const;          // declared-family check
  bool is_nonnegative() const;  // support lies in [0, inf)
};

double sample(const Distribution& dist, Stream& rng);

// How estimates are derived from the truth.
struct NoiseModel {
  enum class Kind {
    kNone,
    kBoundedUniform,   // truth + U(-eps, eps)
    kBoundedShift,     // truth - delta_i + U(-eps, eps)
    kBoundedWorstRR,   // deterministic: pull each value toward its row mean by eps
    kAdditiveIID,      // truth + iid draw from dist
    kSignFlippedMHR,   // truth + sigma * z, sigma uniform +-1, z from MHR dist
  };

  Kind kind = Kind::kNone;
  double eps = 0.0;            // bounded variants
  std::vector<double> shifts;  // kBoundedShift; empty = draw from U[0,1]
  Distribution dist;           // iid / MHR variants

  static NoiseModel none();
  static NoiseModel bounded_uniform(double eps);
  static NoiseModel bounded_shift(double eps, std::vector<double> shifts = {});
  static NoiseModel bounded_worst_rr(double eps);
  static NoiseModel additive_iid(Distribution d);
  static NoiseModel sign_flipped_mhr(Distribution d);

  // e.g. "none", "bounded:0.1", "bounded-shift:0.1", "bounded-worst-rr:0.1",
  // "iid:uniform:-0.2,0.2", "mhr:exp:0.01".
  static NoiseModel parse(const std::string& spec);
  std::string to_string() const;
};

// Bounded variants yield a NoisyInstance whose (eps, shifts) bound is
// machine-verified on construction; stochastic variants record the
// realized max |noise| as eps.
NoisyInstance apply_noise(const ValuationMatrix& truth, const NoiseModel& model,
                          Stream& rng);

struct MhrReport {
  double max_true_envy = 0.0;
  double eps_max = 0.0;         // realized max |noise|
  double beta_log = 0.0;        // 2 * log(nm) * E[dist]
  double beta_harmonic = 0.0;   // 2 * H_{nm} * E[dist]
  bool mean_precondition_ok = true;  // E[dist] <= n / (m log(nm))
  bool order_stat_ok = false;        // eps_max < beta_harmonic
  bool envy_le_10 = false;
};

// Sign-flipped MHR noise on a [0,1] truth matrix, then the picking
// allocator on the estimates. Requires nm >= 4; a violated mean
// precondition only sets the warning flag.
std::pair<Allocation, MhrReport> mhr_pipeline(const ValuationMatrix& truth,
                                              const Distribution& dist,
                                              Stream& rng);

// H_k = 1 + 1/2 + ... + 1/k.
double harmonic_number(int k);

}  // namespace fairdiv
