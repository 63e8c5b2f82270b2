#include "fairdiv/noise.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

namespace fairdiv {

namespace {

std::vector<double> split_params(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str()) throw error("distribution spec: bad number '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

Distribution Distribution::uniform(double lo, double hi) {
  if (!(hi > lo)) throw error("uniform: requires hi > lo");
  Distribution d;
  d.family = Family::kUniform;
  d.a = lo;
  d.b = hi;
  return d;
}

Distribution Distribution::exponential(double mean) {
  if (!(mean > 0.0)) throw error("exponential: mean must be > 0");
  Distribution d;
  d.family = Family::kExponential;
  d.a = mean;
  return d;
}

Distribution Distribution::half_normal(double scale) {
  if (!(scale > 0.0)) throw error("half_normal: scale must be > 0");
  Distribution d;
  d.family = Family::kHalfNormal;
  d.a = scale;
  return d;
}

Distribution Distribution::point_mass(double v) {
  Distribution d;
  d.family = Family::kPointMass;
  d.a = v;
  return d;
}

Distribution Distribution::discrete_table(std::vector<double> support,
                                          std::vector<double> weights) {
  if (support.empty() || support.size() != weights.size())
    throw error("discrete_table: support/weights size mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw error("discrete_table: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw error("discrete_table: weights must sum to 1");
  Distribution d;
  d.family = Family::kDiscreteTable;
  d.support = std::move(support);
  d.weights = std::move(weights);
  return d;
}

Distribution Distribution::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string family = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const auto params = split_params(rest);
  if (family == "uniform") {
    if (params.size() != 2) throw error("uniform spec needs lo,hi");
    return uniform(params[0], params[1]);
  }
  if (family == "exp") {
    if (params.size() != 1) throw error("exp spec needs mean");
    return exponential(params[0]);
  }
  if (family == "halfnormal") {
    if (params.size() != 1) throw error("halfnormal spec needs scale");
    return half_normal(params[0]);
  }
  if (family == "point") {
    if (params.size() != 1) throw error("point spec needs value");
    return point_mass(params[0]);
  }
  if (family == "table") {
    if (params.size() < 2 || params.size() % 2 != 0)
      throw error("table spec needs value,weight pairs");
    std::vector<double> s, w;
    for (std::size_t i = 0; i < params.size(); i += 2) {
      s.push_back(params[i]);
      w.push_back(params[i + 1]);
    }
    return discrete_table(std::move(s), std::move(w));
  }
  throw error("unknown distribution family '" + family + "'");
}

std::string Distribution::to_string() const {
  std::ostringstream os;
  switch (family) {
    case Family::kUniform: os << "uniform:" << a << ',' << b; break;
    case Family::kExponential: os << "exp:" << a; break;
    case Family::kHalfNormal: os << "halfnormal:" << a; break;
    case Family::kPointMass: os << "point:" << a; break;
    case Family::kDiscreteTable:
      os << "table";
      for (std::size_t i = 0; i < support.size(); ++i)
        os << (i == 0 ? ':' : ',') << support[i] << ',' << weights[i];
      break;
  }
  return os.str();
}

double Distribution::mean() const {
  switch (family) {
    case Family::kUniform: return 0.5 * (a + b);
    case Family::kExponential: return a;
    case Family::kHalfNormal: return a * std::sqrt(2.0 / std::numbers::pi);
    case Family::kPointMass: return a;
    case Family::kDiscreteTable: {
      double s = 0.0;
      for (std::size_t i = 0; i < support.size(); ++i) s += support[i] * weights[i];
      return s;
    }
  }
  return 0.0;
}

bool Distribution::is_mhr() const {
  switch (family) {
    case Family::kExponential:
    case Family::kHalfNormal:
      return true;
    case Family::kUniform:
      return a == 0.0;
    case Family::kPointMass:
      return a >= 0.0;
    case Family::kDiscreteTable:
      return false;
  }
  return false;
}

bool Distribution::is_nonnegative() const {
  switch (family) {
    case Family::kUniform: return a >= 0.0;
    case Family::kExponential:
    case Family::kHalfNormal:
      return true;
    case Family::kPointMass: return a >= 0.0;
    case Family::kDiscreteTable:
      for (double v : support)
        if (v < 0.0) return false;
      return true;
  }
  return true;
}

double sample(const Distribution& dist, Stream& rng) {
  switch (dist.family) {
    case Distribution::Family::kUniform:
      return rng.next_double(dist.a, dist.b);
    case Distribution::Family::kExponential:
      return -dist.a * std::log(1.0 - rng.next_double());
    case Distribution::Family::kHalfNormal:
      return dist.a * std::abs(rng.next_gaussian());
    case Distribution::Family::kPointMass:
      return dist.a;
    case Distribution::Family::kDiscreteTable: {
      const double u = rng.next_double();
      double cum = 0.0;
      for (std::size_t i = 0; i < dist.support.size(); ++i) {
        cum += dist.weights[i];
        if (u < cum) return dist.support[i];
      }
      return dist.support.back();
    }
  }
  return 0.0;
}

NoiseModel NoiseModel::none() { return NoiseModel{}; }

NoiseModel NoiseModel::bounded_uniform(double eps) {
  if (eps < 0.0) throw error("noise: eps must be >= 0");
  NoiseModel m;
  m.kind = Kind::kBoundedUniform;
  m.eps = eps;
  return m;
}

NoiseModel NoiseModel::bounded_shift(double eps, std::vector<double> shifts) {
  if (eps < 0.0) throw error("noise: eps must be >= 0");
  NoiseModel m;
  m.kind = Kind::kBoundedShift;
  m.eps = eps;
  m.shifts = std::move(shifts);
  return m;
}

NoiseModel NoiseModel::bounded_worst_rr(double eps) {
  if (eps < 0.0) throw error("noise: eps must be >= 0");
  NoiseModel m;
  m.kind = Kind::kBoundedWorstRR;
  m.eps = eps;
  return m;
}

NoiseModel NoiseModel::additive_iid(Distribution d) {
  NoiseModel m;
  m.kind = Kind::kAdditiveIID;
  m.dist = std::move(d);
  return m;
}

NoiseModel NoiseModel::sign_flipped_mhr(Distribution d) {
  if (!d.is_mhr() || !d.is_nonnegative())
    throw error("noise: sign-flipped model needs a non-negative MHR family");
  NoiseModel m;
  m.kind = Kind::kSignFlippedMHR;
  m.dist = std::move(d);
  return m;
}

NoiseModel NoiseModel::parse(const std::string& spec) {
  if (spec == "none" || spec.empty()) return none();
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "bounded") return bounded_uniform(std::strtod(rest.c_str(), nullptr));
  if (head == "bounded-shift")
    return bounded_shift(std::strtod(rest.c_str(), nullptr));
  if (head == "bounded-worst-rr")
    return bounded_worst_rr(std::strtod(rest.c_str(), nullptr));
  if (head == "iid") return additive_iid(Distribution::parse(rest));
  if (head == "mhr") return sign_flipped_mhr(Distribution::parse(rest));
  throw error("unknown noise spec '" + spec + "'");
}

std::string NoiseModel::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kNone: return "none";
    case Kind::kBoundedUniform: os << "bounded:" << eps; break;
    case Kind::kBoundedShift: os << "bounded-shift:" << eps; break;
    case Kind::kBoundedWorstRR: os << "bounded-worst-rr:" << eps; break;
    case Kind::kAdditiveIID: os << "iid:" << dist.to_string(); break;
    case Kind::kSignFlippedMHR: os << "mhr:" << dist.to_string(); break;
  }
  return os.str();
}

NoisyInstance apply_noise(const ValuationMatrix& truth, const NoiseModel& model,
                          Stream& rng) {
  const int n = truth.n();
  const int m = truth.m();
  std::vector<double> est(truth.values());

  switch (model.kind) {
    case NoiseModel::Kind::kNone:
      return NoisyInstance(truth, ValuationMatrix(n, m, std::move(est)), 0.0);

    case NoiseModel::Kind::kBoundedUniform: {
      for (auto& v : est) v += rng.next_double(-model.eps, model.eps);
      NoisyInstance inst(truth, ValuationMatrix(n, m, std::move(est)), model.eps);
      inst.assert_bound();
      return inst;
    }

    case NoiseModel::Kind::kBoundedShift: {
      std::vector<double> shifts = model.shifts;
      if (shifts.empty()) {
        shifts.resize(n);
        for (auto& d : shifts) d = rng.next_double();
      }
      if (static_cast<int>(shifts.size()) != n)
        throw error("apply_noise: shift vector length mismatch");
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
          est[i * m + j] += -shifts[i] + rng.next_double(-model.eps, model.eps);
      NoisyInstance inst(truth, ValuationMatrix(n, m, std::move(est)), model.eps,
                         std::move(shifts));
      inst.assert_bound();
      return inst;
    }

    case NoiseModel::Kind::kBoundedWorstRR: {
      // Flatten each row toward its mean: destroys exactly the ranking
      // information the picking loop relies on, within the eps budget.
      for (int i = 0; i < n; ++i) {
        double mean = 0.0;
        for (int j = 0; j < m; ++j) mean += truth.at(i, j);
        mean /= std::max(1, m);
        for (int j = 0; j < m; ++j) {
          const double v = truth.at(i, j);
          const double pull = std::min(model.eps, std::abs(v - mean));
          est[i * m + j] = v - (v > mean ? pull : -pull);
        }
      }
      NoisyInstance inst(truth, ValuationMatrix(n, m, std::move(est)), model.eps);
      inst.assert_bound();
      return inst;
    }

    case NoiseModel::Kind::kAdditiveIID: {
      double worst = 0.0;
      for (auto& v : est) {
        const double eta = sample(model.dist, rng);
        worst = std::max(worst, std::abs(eta));
        v += eta;
      }
      return NoisyInstance(truth, ValuationMatrix(n, m, std::move(est)), worst);
    }

    case NoiseModel::Kind::kSignFlippedMHR: {
      // Signs drawn cell-by-cell in row-major order for replayability.
      double worst = 0.0;
      for (auto& v : est) {
        const double z = sample(model.dist, rng);
        const double sigma = rng.next_bernoulli(0.5) ? 1.0 : -1.0;
        worst = std::max(worst, std::abs(z));
        v += sigma * z;
      }
      return NoisyInstance(truth, ValuationMatrix(n, m, std::move(est)), worst);
    }
  }
  throw error("apply_noise: unreachable");
}

double harmonic_number(int k) {
  double h = 0.0;
  for (int i = 1; i <= k; ++i) h += 1.0 / i;
  return h;
}

std::pair<Allocation, MhrReport> mhr_pipeline(const ValuationMatrix& truth,
                                              const Distribution& dist,
                                              Stream& rng) {
  const int n = truth.n();
  const int m = truth.m();
  if (n * m < 4) throw error("mhr_pipeline: requires nm >= 4");
  if (!dist.is_mhr() || !dist.is_nonnegative())
    throw error("mhr_pipeline: distribution must be a non-negative MHR family");

  MhrReport rep;
  const double mu = dist.mean();
  const double log_nm = std::log(static_cast<double>(n) * m);
  rep.mean_precondition_ok = mu <= n / (m * log_nm) + 1e-15;
  rep.beta_log = 2.0 * log_nm * mu;
  rep.beta_harmonic = 2.0 * harmonic_number(n * m) * mu;

  NoisyInstance inst = apply_noise(truth, NoiseModel::sign_flipped_mhr(dist), rng);
  rep.eps_max = inst.realized_noise_bound();

  Allocation alloc = round_robin(inst.estimates);
  const EnvyReport envy = envy_report(truth, alloc);
  rep.max_true_envy = envy.max_envy;
  rep.order_stat_ok = rep.eps_max < rep.beta_harmonic;
  rep.envy_le_10 = envy.max_envy <= 10.0;
  return {std::move(alloc), rep};
}

}  // namespace fairdiv
