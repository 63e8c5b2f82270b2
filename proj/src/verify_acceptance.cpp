#include <chrono>
#include <cmath>
#include <sstream>

#include "fairdiv/allocators.hpp"
#include "fairdiv/btl.hpp"
#include "fairdiv/discrepancy.hpp"
#include "fairdiv/experiments.hpp"
#include "fairdiv/lp.hpp"
#include "fairdiv/noise.hpp"
#include "fairdiv/statcheck.hpp"
#include "fairdiv/verify.hpp"

namespace fairdiv {

namespace {

// ---- randomized-case generators shared by the oracle battery ----------

// Supports are separated by at least 0.1 and weights bounded below, so a
// mathematically strict gap is numerically macroscopic (>> 1e-12).
DiscreteRV gen_rv(Stream& rng, int max_points) {
  const int k = 1 + static_cast<int>(rng.next_below(max_points));
  std::vector<double> support(k), weights(k);
  double x = rng.next_double(-1.0, 1.0);
  for (int i = 0; i < k; ++i) {
    support[i] = x;
    x += rng.next_double(0.1, 1.0);
    weights[i] = 1.0 + static_cast<double>(rng.next_below(20));
  }
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  double partial = 0.0;
  for (int i = 0; i + 1 < k; ++i) partial += weights[i];
  weights[k - 1] = 1.0 - partial;
  return DiscreteRV(std::move(support), std::move(weights));
}

std::vector<double> gen_monotone_table(Stream& rng, int k, bool force_constant) {
  std::vector<double> t(k);
  double v = rng.next_double(-1.0, 1.0);
  for (int i = 0; i < k; ++i) {
    t[i] = v;
    if (!force_constant && rng.next_bernoulli(0.6)) v += rng.next_double(0.1, 1.0);
  }
  return t;
}

long correlation_case_violations(Stream& rng) {
  const DiscreteRV x = gen_rv(rng, 6);
  const auto f = gen_monotone_table(rng, x.size(), rng.next_bernoulli(0.2));
  const auto g = gen_monotone_table(rng, x.size(), rng.next_bernoulli(0.2));
  const double gap = association_gap(x, f, g);
  long violations = 0;
  if (gap < -1e-12) ++violations;
  if ((gap > 1e-12) != strict_condition(x, f, g)) ++violations;
  return violations;
}

long conditional_case_violations(Stream& rng) {
  for (;;) {
    const DiscreteRV d = gen_rv(rng, 3);
    const DiscreteRV dp = gen_rv(rng, 3);
    if (!d.has_positive_variance() && !dp.has_positive_variance()) continue;
    const int n = 2 + static_cast<int>(rng.next_below(2));
    const auto gap = conditional_mean_gap(d, dp, n);
    long violations = 0;
    if (dp.has_positive_variance() && !(gap.mean_win >= gap.mean_lose - 1e-12))
      ++violations;
    if (d.has_positive_variance() && !(gap.mean_win > gap.mean_lose + 1e-12))
      ++violations;
    return violations;
  }
}

// ---- criterion helpers -------------------------------------------------

using Clock = std::chrono::steady_clock;

struct Timer {
  Clock::time_point start = Clock::now();
  double seconds() const {
    return std::chrono::duration<double>(Clock::now() - start).count();
  }
};

std::string fraction(long hits, long total) {
  return std::to_string(hits) + "/" + std::to_string(total);
}

ValuationMatrix uniform_matrix(int n, int m, Stream& rng, double lo, double hi) {
  std::vector<double> v(static_cast<std::size_t>(n) * m);
  for (auto& x : v) x = rng.next_double(lo, hi);
  return ValuationMatrix(n, m, std::move(v));
}

CriterionResult crit_rr_upper(std::uint64_t seed) {
  Timer timer;
  long ok = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    Stream rng(seed, t, "acc1/instance");
    const int n = 2 + static_cast<int>(rng.next_below(7));
    const int m = n + static_cast<int>(rng.next_below(61 - n));
    const double eps = rng.next_double(0.0, 0.5);
    std::vector<double> vals(static_cast<std::size_t>(n) * m);
    for (auto& v : vals) v = rng.next_double();
    const ValuationMatrix truth(n, m, std::move(vals), std::make_pair(0.0, 1.0));
    const NoisyInstance inst =
        apply_noise(truth, NoiseModel::bounded_shift(eps), rng);
    const Allocation alloc = round_robin(inst.estimates);
    if (envy_report(truth, alloc).max_envy <= rr_envy_bound(n, m, eps, 1.0)) ++ok;
  }
  CriterionResult r{1, "round-robin upper bound", ok == trials,
                    fraction(ok, trials) + " within 2*eps*ceil(m/n)+1", 0.0};
  r.elapsed_s = timer.seconds();
  return r;
}

CriterionResult crit_rr_lower(std::uint64_t seed) {
  (void)seed;
  Timer timer;
  long cases = 0, ok = 0;
  for (int n = 2; n <= 5; ++n)
    for (int m = n; m <= 40; ++m)
      for (double eps : {0.05, 0.25}) {
        ++cases;
        const ValuationMatrix half = ValuationMatrix::constant(n, m, 0.5);
        const Allocation alloc = round_robin(half);
        const ValuationMatrix truth = adversarial_instance(n, m, eps, alloc);
        if (envy_report(truth, alloc).max_envy >=
            2.0 * eps * m / static_cast<double>(n) - 1e-9)
          ++ok;
      }
  CriterionResult r{2, "deterministic lower bound tightness", ok == cases,
                    fraction(ok, cases) + " at envy >= 2*eps*m/n - 1e-9", 0.0};
  r.elapsed_s = timer.seconds();
  return r;
}

CriterionResult crit_welfare(std::uint64_t seed) {
  Timer timer;
  const int trials = 500, n = 5, m = 400;
  long ef = 0;
  for (int t = 0; t < trials; ++t) {
    Stream inst_rng(seed, t, "acc3/instance");
    Stream algo_rng(seed, t, "acc3/algo");
    std::vector<double> truth_vals(static_cast<std::size_t>(n) * m);
    std::vector<double> est_vals(truth_vals.size());
    for (std::size_t i = 0; i < truth_vals.size(); ++i) {
      truth_vals[i] = inst_rng.next_double();
      est_vals[i] = truth_vals[i] + inst_rng.next_double(-0.2, 0.2);
    }
    const ValuationMatrix truth(n, m, std::move(truth_vals));
    const ValuationMatrix estimates(n, m, std::move(est_vals));
    const Allocation alloc = welfare_max(estimates, algo_rng);
    if (envy_report(truth, alloc).is_envy_free) ++ef;
  }
  const bool pass = ef >= static_cast<long>(0.95 * trials);
  CriterionResult r{3, "welfare maximization EF w.h.p.", pass,
                    fraction(ef, trials) + " envy-free (floor 475)", 0.0};
  r.elapsed_s = timer.seconds();
  return r;
}

CriterionResult crit_correlation(std::uint64_t seed) {
  Timer timer;
  long violations = 0;
  const int cases = 200;
  for (int t = 0; t < cases; ++t) {
    Stream rng(seed, t, "acc4/case");
    violations += correlation_case_violations(rng);
  }
  CriterionResult r{4, "strict correlation oracle", violations == 0,
                    std::to_string(violations) + " violations in 200 cases", 0.0};
  r.elapsed_s = timer.seconds();
  return r;
}

CriterionResult crit_conditional(std::uint64_t seed) {
  Timer timer;
  long violations = 0;
  const int cases = 100;
  for (int t = 0; t < cases; ++t) {
    Stream rng(seed, t, "acc5/case");
    violations += conditional_case_violations(rng);
  }
  CriterionResult r{5, "noisy-argmax conditional means", violations == 0,
                    std::to_string(violations) + " violations in 100 cases", 0.0};
  r.elapsed_s = timer.seconds();
  return r;
}

CriterionResult crit_lp(std::uint64_t seed) {
  Timer timer;
  const int trials = 200, n = 3, m = 150;
  long strong = 0, ef = 0;
  for (int t = 0; t < trials; ++t) {
    Stream inst_rng(seed, t, "acc6/instance");
    Stream round_rng(seed, t, "acc6/round");
    const ValuationMatrix truth = uniform_matrix(n, m, inst_rng, 0.0, 1.0);
    const NoisyInstance inst =
        apply_noise(truth, NoiseModel::bounded_uniform(0.01), inst_rng);
    const LpPipelineResult result = lp_pipeline(inst, round_rng);
    if (result.frac.alpha <= -0.01 * m) ++strong;
    if (result.true_envy <= kEnvyTol) ++ef;
  }

  long matched = 0;
  const int audits = 50;
  for (int t = 0; t < audits; ++t) {
    Stream rng(seed, t, "acc6/audit");
    const int an = 2 + static_cast<int>(rng.next_below(2));
    const int am = 2 + static_cast<int>(rng.next_below(6));
    const ValuationMatrix est = uniform_matrix(an, am, rng, 0.0, 1.0);
    const LinearProgram lp = build_minmax_envy_lp(est);
    const double alpha = solve_lp(lp).alpha;
    const bool vs_exact = std::abs(alpha - exact_lp_optimum(lp)) <= 1e-6;
    const bool vs_integral = alpha <= min_integral_max_envy(est) + 1e-6;
    if (vs_exact && vs_integral) ++matched;
  }

  const bool pass = strong >= 190 && ef >= 180 && matched == audits;
  CriterionResult r{6, "LP + randomized rounding pipeline", pass,
                    "alpha<=-0.01m " + fraction(strong, trials) + ", EF " +
                        fraction(ef, trials) + ", oracle match " +
                        fraction(matched, audits),
                    0.0};
  r.elapsed_s = timer.seconds();
  return r;
}

CriterionResult crit_balancer(std::uint64_t seed) {
  Timer timer;
  const int runs = 200, m = 500;
  bool pass = true;
  std::ostringstream detail;
  for (int n : {2, 4}) {
    BalancerParams params;
    params.n = n;
    params.m = m;
    params.delta = 0.1;
    params.C = 0.1;
    params.p = 0.5;
    params.eps = std::log(5.0 * n * m / params.delta) / m;

    long within = 0, failed_runs = 0;
    for (int rrun = 0; rrun < runs; ++rrun) {
      Stream sign_rng(seed, rrun, n == 2 ? "acc7/signs2" : "acc7/signs4");
      Stream vec_rng(seed, rrun, n == 2 ? "acc7/vecs2" : "acc7/vecs4");
      Balancer bal(params);
      std::vector<double> truth(n), noisy(n);
      bool ok = true;
      for (int t = 1; t <= m; ++t) {
        for (int i = 0; i < n; ++i) {
          truth[i] = vec_rng.next_double(-1.0, 1.0);
          noisy[i] = truth[i] + vec_rng.next_double(-params.eps, params.eps);
        }
        bal.step(noisy, sign_rng);
        bal.reveal(truth);
        if (bal.w_inf_norm() > balancer_inf_bound(params, t)) ok = false;
      }
      if (ok) ++within;
      if (bal.fail_count() > 0) ++failed_runs;
    }
    const double fail_cap = params.delta + 3.0 * std::sqrt(params.delta / runs);
    const bool n_pass =
        within >= 180 && failed_runs <= static_cast<long>(fail_cap * runs);
    pass = pass && n_pass;
    detail << "n=" << n << " within " << fraction(within, runs) << " fails "
           << failed_runs << "; ";
  }
  CriterionResult r{7, "online balancer walk bound", pass, detail.str(), 0.0};
  r.elapsed_s = timer.seconds();
  return r;
}

CriterionResult crit_multicolor_envy(std::uint64_t seed) {
  Timer timer;
  const int runs = 200, n = 4, m = 400, k = 4;
  const double delta = 0.1, C = 0.1;
  const double eps = std::log(5.0 * n * m * k / delta) / m;
  const double disc_bound = multicolor_bound(n, m, k, eps, delta, C);

  long reduction_ok = 0, disc_ok = 0;
  for (int rrun = 0; rrun < runs; ++rrun) {
    Stream sign_rng(seed, rrun, "acc8/signs");
    Stream vec_rng(seed, rrun, "acc8/vecs");
    std::vector<double> truth_vals(static_cast<std::size_t>(n) * m);
    std::vector<double> est_vals(truth_vals.size());
    for (std::size_t i = 0; i < truth_vals.size(); ++i) {
      truth_vals[i] = vec_rng.next_double(-1.0, 1.0);
      est_vals[i] = truth_vals[i] + vec_rng.next_double(-eps, eps);
    }
    const ValuationMatrix truth(n, m, std::move(truth_vals));
    const ValuationMatrix estimates(n, m, std::move(est_vals));
    const auto out = online_envy_allocate(truth, estimates,
                                          OnlineEnvyParams{eps, delta, C}, sign_rng);
    if (out.max_envy_true <= out.discrepancy + 1e-12) ++reduction_ok;
    if (out.discrepancy <= disc_bound) ++disc_ok;
  }
  const long disc_floor = static_cast<long>(
      std::ceil(runs * (1 - delta) - 3.0 * std::sqrt(runs * delta * (1 - delta))));
  const bool pass = reduction_ok == runs && disc_ok >= disc_floor;
  CriterionResult r{8, "multicolored discrepancy + envy reduction", pass,
                    "envy<=disc " + fraction(reduction_ok, runs) + ", disc<=bound " +
                        fraction(disc_ok, runs) + " (floor " +
                        std::to_string(disc_floor) + ")",
                    0.0};
  r.elapsed_s = timer.seconds();
  return r;
}

CriterionResult crit_btl(std::uint64_t seed) {
  Timer timer;

  // (a) infinite-sample oracle recovers the scores on small graphs.
  long recovered = 0;
  const int graphs = 20;
  for (int t = 0; t < graphs; ++t) {
    Stream rng(seed, t, "acc9/exact");
    const int m = 3 + static_cast<int>(rng.next_below(8));
    ObservationGraph graph;
    do {
      graph = sample_er_graph(m, 0.5, rng);
    } while (!graph.connected());
    std::vector<double> star(m);
    double mean = 0.0;
    for (auto& v : star) {
      v = rng.next_double();
      mean += v;
    }
    for (auto& v : star) v -= mean / m;
    const PreferenceVector est =
        mle_estimate(exact_frequencies(star, graph), m * 0.5);
    double err = 0.0;
    for (int j = 0; j < m; ++j) err = std::max(err, std::abs(est.theta[j] - star[j]));
    if (err <= 1e-6) ++recovered;
  }

  // (b) quadrupling K about halves the median estimation error.
  const int trials = 50, m = 60;
  const double p = 0.5;
  std::vector<double> err_k, err_4k;
  for (int t = 0; t < trials; ++t) {
    Stream rng(seed, t, "acc9/scaling");
    std::vector<double> star(m);
    double mean = 0.0;
    for (auto& v : star) {
      v = rng.next_double();
      mean += v;
    }
    for (auto& v : star) v -= mean / m;
    ObservationGraph graph;
    do {
      graph = sample_er_graph(m, p, rng);
    } while (!graph.connected());
    for (int variant = 0; variant < 2; ++variant) {
      const int K = variant == 0 ? 250 : 1000;
      const auto data = simulate_comparisons(star, graph, K, rng);
      const PreferenceVector est = mle_estimate(data, m * p);
      double err = 0.0;
      for (int j = 0; j < m; ++j)
        err = std::max(err, std::abs(est.theta[j] - star[j]));
      (variant == 0 ? err_k : err_4k).push_back(err);
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  };
  const double ratio = median(err_k) / median(err_4k);
  const bool scaling_ok = ratio >= 1.7 && ratio <= 2.6;

  // (c) shifting one agent's values never changes the allocation.
  // Values on a 1/64 grid with a power-of-two m keep centering exact.
  const int sn = 2, sm = 32;
  Stream val_rng(seed, 0, "acc9/shift");
  std::vector<double> base(static_cast<std::size_t>(sn) * sm);
  for (auto& v : base) v = static_cast<double>(val_rng.next_below(65)) / 64.0;
  std::vector<double> shifted = base;
  for (int j = 0; j < sm; ++j) shifted[j] += 1.0;
  Stream rng_a(seed, 1, "acc9/shift-run");
  Stream rng_b(seed, 1, "acc9/shift-run");
  const auto run_a = btl_fair_divide(ValuationMatrix(sn, sm, base), 0.9, 50, rng_a);
  const auto run_b =
      btl_fair_divide(ValuationMatrix(sn, sm, shifted), 0.9, 50, rng_b);
  const bool shift_ok = run_a.first == run_b.first;

  const bool pass = recovered == graphs && scaling_ok && shift_ok;
  std::ostringstream detail;
  detail << "oracle " << fraction(recovered, graphs) << ", K-ratio "
         << format_double(ratio) << " in [1.7,2.6] " << (scaling_ok ? "yes" : "NO")
         << ", shift-invariant " << (shift_ok ? "yes" : "NO");
  CriterionResult r{9, "BTL consistency and scaling", pass, detail.str(), 0.0};
  r.elapsed_s = timer.seconds();
  return r;
}

CriterionResult crit_mhr(std::uint64_t seed) {
  Timer timer;
  const int batches = 500, n = 4, m = 40;
  const double mean = n / (m * std::log(static_cast<double>(n) * m));
  const Distribution dist = Distribution::exponential(mean);

  long envy_ok = 0, order_ok = 0;
  for (int t = 0; t < batches; ++t) {
    Stream inst_rng(seed, t, "acc10/instance");
    Stream noise_rng(seed, t, "acc10/noise");
    const ValuationMatrix truth = uniform_matrix(n, m, inst_rng, 0.0, 1.0);
    const auto [alloc, rep] = mhr_pipeline(truth, dist, noise_rng);
    if (rep.envy_le_10) ++envy_ok;
    if (rep.order_stat_ok) ++order_ok;
  }
  const double q = std::pow(static_cast<double>(n) * m, -0.6);
  const long floor_count = static_cast<long>(std::ceil(
      batches * (1.0 - q - 3.0 * std::sqrt(q * (1.0 - q) / batches))));
  const bool pass = envy_ok >= floor_count && order_ok >= floor_count;
  CriterionResult r{10, "MHR noise keeps envy below 10", pass,
                    "envy<=10 " + fraction(envy_ok, batches) + ", max<2*H*mean " +
                        fraction(order_ok, batches) + " (floor " +
                        std::to_string(floor_count) + ")",
                    0.0};
  r.elapsed_s = timer.seconds();
  return r;
}

CriterionResult crit_determinism(std::uint64_t seed) {
  Timer timer;
  long checked = 0, identical = 0;
  for (const std::string& cmd : ExperimentConfig::known_commands()) {
    if (cmd == "verify-all") continue;  // its rows are these criteria
    ExperimentConfig cfg;
    cfg.command = cmd;
    cfg.n = 3;
    cfg.m = 8;
    cfg.trials = 3;
    cfg.seed = seed;
    cfg.seed_set = true;
    cfg.eps = 0.1;
    cfg.K = 50;
    cfg.p = cmd == "balance" ? 0.5 : 0.9;

    std::ostringstream csv_a, csv_b, json_a, json_b;
    write_report_csv(run_experiment(cfg), csv_a);
    write_report_csv(run_experiment(cfg), csv_b);
    cfg.json = true;
    write_report_json(run_experiment(cfg), json_a);
    write_report_json(run_experiment(cfg), json_b);
    ++checked;
    if (csv_a.str() == csv_b.str() && json_a.str() == json_b.str()) ++identical;
  }
  CriterionResult r{11, "byte-identical reports per seed", identical == checked,
                    fraction(identical, checked) + " subcommands byte-stable", 0.0};
  r.elapsed_s = timer.seconds();
  return r;
}

}  // namespace

long statcheck_case_violations(Stream& rng) {
  return correlation_case_violations(rng) + conditional_case_violations(rng);
}

std::vector<CriterionResult> run_acceptance(
    std::uint64_t seed, const std::function<void(const CriterionResult&)>& sink) {
  std::vector<CriterionResult> results;
  const auto push = [&](CriterionResult r) {
    if (sink) sink(r);
    results.push_back(std::move(r));
  };
  push(crit_rr_upper(seed));
  push(crit_rr_lower(seed));
  push(crit_welfare(seed));
  push(crit_correlation(seed));
  push(crit_conditional(seed));
  push(crit_lp(seed));
  push(crit_balancer(seed));
  push(crit_multicolor_envy(seed));
  push(crit_btl(seed));
  push(crit_mhr(seed));
  push(crit_determinism(seed));
  return results;
}

}  // namespace fairdiv
