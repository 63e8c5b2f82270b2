#include <cmath>

#include "doctest.h"
#include "fairdiv/allocators.hpp"
#include "fairdiv/noise.hpp"
#include "fairdiv/verify.hpp"

using namespace fairdiv;

namespace {

ValuationMatrix random_matrix(int n, int m, Stream& rng) {
  std::vector<double> v(static_cast<std::size_t>(n) * m);
  for (auto& x : v) x = rng.next_double();
  return ValuationMatrix(n, m, std::move(v), std::make_pair(0.0, 1.0));
}

double welfare_of(const ValuationMatrix& v, const Allocation& a) {
  double w = 0.0;
  for (int i = 0; i < v.n(); ++i) w += v.bundle_value(i, a.bundle(i));
  return w;
}

}  // namespace

TEST_CASE("round robin: identical preferences alternate picks") {
  ValuationMatrix est(2, 4, {4, 3, 2, 1, 4, 3, 2, 1});
  const Allocation a = round_robin(est, PickOrder({0, 1}));
  CHECK(a.bundle(0) == std::vector<int>{0, 2});
  CHECK(a.bundle(1) == std::vector<int>{1, 3});
}

TEST_CASE("round robin: degenerate agent and item counts") {
  ValuationMatrix one_agent(1, 3, {5, 1, 3});
  CHECK(round_robin(one_agent).bundle(0) == std::vector<int>{0, 1, 2});

  ValuationMatrix no_items(2, 0, {});
  const Allocation empty = round_robin(no_items);
  CHECK(empty.bundle(0).empty());
  CHECK(empty.bundle(1).empty());
}

TEST_CASE("round robin: balanced and EF1 w.r.t. estimates on random instances") {
  Stream rng(21, 0, "alloc-test");
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(6));
    const int m = static_cast<int>(rng.next_below(30));
    const auto est = random_matrix(n, m, rng);
    const Allocation a = round_robin(est);
    CHECK(is_balanced(a, m, n));
    const EnvyReport rep = envy_report(est, a);
    CHECK(rep.is_ef1);
  }
}

TEST_CASE("round robin: worst-case true envy bound under bounded shifted noise") {
  Stream rng(22, 0, "alloc-test");
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(7));
    const int m = n + static_cast<int>(rng.next_below(61 - n));
    const double eps = rng.next_double(0.0, 0.5);
    const auto truth = random_matrix(n, m, rng);
    const NoisyInstance inst =
        apply_noise(truth, NoiseModel::bounded_shift(eps), rng);
    const Allocation a = round_robin(inst.estimates);
    const double envy = envy_report(truth, a).max_envy;
    CHECK(envy <= rr_envy_bound(n, m, eps, 1.0));
  }
}

TEST_CASE("rr envy bound formula") {
  CHECK(rr_envy_bound(2, 4, 0.1, 1.0) == doctest::Approx(1.4));
  CHECK(rr_envy_bound(5, 17, 0.0, 2.5) == 2.5);
  CHECK(rr_envy_bound(3, 7, 0.5, 0.0) == doctest::Approx(3.0));
}

TEST_CASE("welfare max: unique argmax per item") {
  ValuationMatrix est(2, 2, {0.9, 0.1, 0.2, 0.8});
  Stream rng(23, 0, "alloc-test");
  const Allocation a = welfare_max(est, rng);
  CHECK(a.bundle(0) == std::vector<int>{0});
  CHECK(a.bundle(1) == std::vector<int>{1});
}

TEST_CASE("welfare max: ties split uniformly across seeds") {
  ValuationMatrix est(2, 1, {0.5, 0.5});
  int agent0 = 0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    Stream rng(24, t, "alloc-test");
    if (welfare_max(est, rng).bundle(0).size() == 1) ++agent0;
  }
  CHECK(std::abs(agent0 / static_cast<double>(trials) - 0.5) <= 0.02);
}

TEST_CASE("welfare max: no items yields empty bundles") {
  Stream rng(25, 0, "alloc-test");
  const Allocation a = welfare_max(ValuationMatrix(3, 0, {}), rng);
  for (int i = 0; i < 3; ++i) CHECK(a.bundle(i).empty());
}

TEST_CASE("welfare max matches exhaustive welfare optimum") {
  Stream rng(26, 0, "alloc-test");
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(2));
    const int m = 1 + static_cast<int>(rng.next_below(8));
    const auto est = random_matrix(n, m, rng);
    const Allocation a = welfare_max(est, rng);
    CHECK(welfare_of(est, a) ==
          doctest::Approx(max_integral_welfare(est)).epsilon(1e-12));
  }
}

TEST_CASE("adversarial instance: equal bundles give envy exactly 2*eps*m/n") {
  const Allocation a(2, 4, {{0, 1}, {2, 3}});
  const ValuationMatrix truth = adversarial_instance(2, 4, 0.1, a);
  const EnvyReport rep = envy_report(truth, a);
  CHECK(rep.envy(1, 0) == doctest::Approx(0.4));
  CHECK(rep.max_envy == doctest::Approx(2 * 0.1 * 4 / 2.0));
}

TEST_CASE("adversarial instance: single item each at eps = 1/2") {
  const Allocation a(2, 2, {{0}, {1}});
  const ValuationMatrix truth = adversarial_instance(2, 2, 0.5, a);
  CHECK(envy_report(truth, a).envy(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("adversarial instance: empty runner-up bundle") {
  const Allocation a(2, 3, {{0, 1, 2}, {}});
  const ValuationMatrix truth = adversarial_instance(2, 3, 0.1, a);
  const double envy = envy_report(truth, a).envy(1, 0);
  CHECK(envy == doctest::Approx(3 * 0.6));
  CHECK(envy >= 2 * 0.1 * 3 / 2.0);
}

TEST_CASE("adversarial instance: eps outside (0, 1/2] is rejected") {
  const Allocation a(2, 2, {{0}, {1}});
  CHECK_THROWS_AS(adversarial_instance(2, 2, 0.0, a), error);
  CHECK_THROWS_AS(adversarial_instance(2, 2, 0.6, a), error);
}

TEST_CASE("deterministic allocators cannot beat the adversarial lower bound") {
  for (int n = 2; n <= 5; ++n) {
    for (int m = n; m <= 40; m += 3) {
      for (double eps : {0.05, 0.25}) {
        const ValuationMatrix half = ValuationMatrix::constant(n, m, 0.5);

        const Allocation rr = round_robin(half);
        const ValuationMatrix t1 = adversarial_instance(n, m, eps, rr);
        CHECK(envy_report(t1, rr).max_envy >=
              2 * eps * m / static_cast<double>(n) - 1e-9);

        Stream rng(27, static_cast<std::uint64_t>(n * 100 + m), "alloc-test");
        const Allocation wm = welfare_max(half, rng);
        const ValuationMatrix t2 = adversarial_instance(n, m, eps, wm);
        CHECK(envy_report(t2, wm).max_envy >=
              2 * eps * m / static_cast<double>(n) - 1e-9);
      }
    }
  }
}

TEST_CASE("pick order validates permutations") {
  CHECK_THROWS_AS(PickOrder({0, 0}), error);
  CHECK_THROWS_AS(PickOrder({0, 2}), error);
  CHECK_NOTHROW(PickOrder({2, 0, 1}));
}
