#include <cmath>

#include "doctest.h"
#include "fairdiv/lp.hpp"
#include "fairdiv/noise.hpp"
#include "fairdiv/verify.hpp"

using namespace fairdiv;

namespace {

ValuationMatrix random_matrix(int n, int m, Stream& rng) {
  std::vector<double> v(static_cast<std::size_t>(n) * m);
  for (auto& x : v) x = rng.next_double();
  return ValuationMatrix(n, m, std::move(v));
}

}  // namespace

TEST_CASE("lp builder: variable and constraint counts") {
  const auto lp22 = build_minmax_envy_lp(ValuationMatrix::constant(2, 2, 1.0));
  CHECK(lp22.num_vars == 5);
  int envy_rows = 0, eq_rows = 0;
  for (auto s : lp22.senses)
    (s == LinearProgram::Sense::kEq ? eq_rows : envy_rows) += 1;
  CHECK(envy_rows == 2);
  CHECK(eq_rows == 2);

  const auto lp34 = build_minmax_envy_lp(ValuationMatrix::constant(3, 4, 1.0));
  CHECK(lp34.num_vars == 13);
  CHECK(lp34.num_rows() == 6 + 4);
  CHECK_THROWS_AS(build_minmax_envy_lp(ValuationMatrix::constant(1, 3, 1.0)), error);
}

TEST_CASE("lp solve: one contested item splits evenly") {
  // Grid oracle: max(1-2x, 2x-1) over x in [0,1] is minimized at x = 1/2.
  double grid_best = 1e9;
  for (int i = 0; i <= 1000; ++i) {
    const double x = i / 1000.0;
    grid_best = std::min(grid_best, std::max(1 - 2 * x, 2 * x - 1));
  }
  CHECK(grid_best == doctest::Approx(0.0).epsilon(1e-9));

  const auto frac =
      solve_lp(build_minmax_envy_lp(ValuationMatrix(2, 1, {1.0, 1.0})));
  CHECK(frac.alpha == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("lp solve: separable instance reaches alpha = -1 integrally") {
  const ValuationMatrix est(2, 2, {1, 0, 0, 1});
  const auto frac = solve_lp(build_minmax_envy_lp(est));
  CHECK(frac.alpha == doctest::Approx(-1.0).epsilon(1e-8));
  frac.validate(est);
  // Averaging the two envy constraints forces alpha >= -1, and the
  // integral split attains it, so x* must give each agent its own item.
  CHECK(frac.at(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(frac.at(1, 1) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("lp solve: symmetric instances settle at alpha = 0") {
  const auto frac =
      solve_lp(build_minmax_envy_lp(ValuationMatrix::constant(2, 2, 1.0)));
  CHECK(frac.alpha == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("lp optimum is bounded by the integral optimum and matched exactly") {
  Stream rng(61, 0, "lp-test");
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(2));
    const int m = 2 + static_cast<int>(rng.next_below(6));
    const auto est = random_matrix(n, m, rng);
    const auto lp = build_minmax_envy_lp(est);
    const auto frac = solve_lp(lp);
    frac.validate(est);
    CHECK(frac.alpha <= min_integral_max_envy(est) + 1e-8);
    CHECK(frac.alpha == doctest::Approx(exact_lp_optimum(lp)).epsilon(1e-9));
  }
}

TEST_CASE("randomized rounding: integral columns round to themselves") {
  FractionalAllocation frac;
  frac.n = 3;
  frac.m = 2;
  frac.x = {1, 0, 0, 0, 0, 1, 0, 0};
  frac.x.resize(6);
  frac.x = {1, 0, 0, 0, 0, 1};
  for (int t = 0; t < 10; ++t) {
    Stream rng(62, t, "lp-test");
    const Allocation a = randomized_round(frac, rng);
    CHECK(a.bundle(0) == std::vector<int>{0});
    CHECK(a.bundle(2) == std::vector<int>{1});
  }
}

TEST_CASE("randomized rounding: half/half column splits evenly over seeds") {
  FractionalAllocation frac;
  frac.n = 2;
  frac.m = 1;
  frac.x = {0.5, 0.5};
  int first = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    Stream rng(63, t, "lp-test");
    if (!randomized_round(frac, rng).bundle(0).empty()) ++first;
  }
  CHECK(std::abs(first / static_cast<double>(trials) - 0.5) <= 0.02);
}

TEST_CASE("randomized rounding: rejects badly normalized columns") {
  FractionalAllocation frac;
  frac.n = 2;
  frac.m = 1;
  frac.x = {0.7, 0.2};
  Stream rng(64, 0, "lp-test");
  CHECK_THROWS_AS(randomized_round(frac, rng), error);
}

TEST_CASE("rounded bundle estimates match their fractional expectations") {
  Stream rng(65, 0, "lp-test");
  const auto est = random_matrix(3, 6, rng);
  const auto frac = solve_lp(build_minmax_envy_lp(est));

  const int draws = 10000;
  std::vector<double> mean(9, 0.0);
  for (int t = 0; t < draws; ++t) {
    Stream round_rng(66, t, "lp-test");
    const Allocation a = randomized_round(frac, round_rng);
    for (int i = 0; i < 3; ++i)
      for (int ip = 0; ip < 3; ++ip)
        mean[i * 3 + ip] += est.bundle_value(i, a.bundle(ip));
  }
  for (int i = 0; i < 3; ++i)
    for (int ip = 0; ip < 3; ++ip) {
      double expected = 0.0, var = 0.0;
      for (int j = 0; j < 6; ++j) {
        const double v = est.at(i, j), p = frac.at(ip, j);
        expected += v * p;
        var += v * v * p * (1 - p);
      }
      const double se = std::sqrt(var / draws) + 1e-12;
      CHECK(std::abs(mean[i * 3 + ip] / draws - expected) <= 3 * se + 1e-9);
    }
}

TEST_CASE("lp pipeline: zero noise on a separable instance is envy-free") {
  ValuationMatrix truth(2, 2, {1, 0, 0, 1});
  NoisyInstance inst(truth, truth, 0.0);
  Stream rng(67, 0, "lp-test");
  const auto result = lp_pipeline(inst, rng);
  CHECK(result.true_envy <= 0.0 + 1e-12);
  CHECK(result.frac.alpha == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("lp pipeline: single contested item goes to somebody") {
  ValuationMatrix truth(2, 1, {1, 1});
  NoisyInstance inst(truth, truth, 0.0);
  Stream rng(68, 0, "lp-test");
  const auto result = lp_pipeline(inst, rng);
  CHECK(result.true_envy == doctest::Approx(1.0));
}

TEST_CASE("lp pipeline: single agent skips the program") {
  ValuationMatrix truth(1, 4, {1, 2, 3, 4});
  NoisyInstance inst(truth, truth, 0.0);
  Stream rng(69, 0, "lp-test");
  const auto result = lp_pipeline(inst, rng);
  CHECK(result.alloc.bundle(0).size() == 4);
  CHECK(result.true_envy == 0.0);
}

TEST_CASE("lp text dump mentions every block") {
  const auto lp = build_minmax_envy_lp(ValuationMatrix(2, 1, {1.0, 1.0}));
  const std::string text = lp.to_text();
  CHECK(text.find("minimize") != std::string::npos);
  CHECK(text.find("==") != std::string::npos);
  CHECK(text.find("free") != std::string::npos);
}

TEST_CASE("lp pipeline: wide instances are envy-free in most seeded trials") {
  const int trials = 30, n = 3, m = 120;
  int ef = 0;
  for (int t = 0; t < trials; ++t) {
    Stream inst_rng(71, t, "lp-test");
    Stream round_rng(72, t, "lp-test");
    const auto truth = random_matrix(n, m, inst_rng);
    std::vector<double> est = truth.values();
    for (auto& v : est) v += inst_rng.next_double(-0.01, 0.01);
    NoisyInstance inst(truth, ValuationMatrix(n, m, std::move(est)), 0.01);
    if (lp_pipeline(inst, round_rng).true_envy <= kEnvyTol) ++ef;
  }
  CHECK(ef >= 27);
}

TEST_CASE("fractional allocations converge to strongly negative alpha") {
  // Independent per-coordinate values keep agents non-proportional, so
  // the fractional optimum scales linearly with the item count.
  Stream rng(70, 0, "lp-test");
  int hits = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    const int m = 100;
    const auto est = random_matrix(3, m, rng);
    const auto frac = solve_lp(build_minmax_envy_lp(est));
    if (frac.alpha <= -0.01 * m) ++hits;
  }
  CHECK(hits >= 19);
}
