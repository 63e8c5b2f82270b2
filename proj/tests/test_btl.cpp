#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fairdiv/allocators.hpp"
#include "fairdiv/btl.hpp"

using namespace fairdiv;

TEST_CASE("sigmoid basics") {
  CHECK(sigmoid(0.0) == 0.5);
  for (double t : {1.0, 10.0, 100.0})
    CHECK(std::abs(sigmoid(t) + sigmoid(-t) - 1.0) <= 1e-15);
  // Reference value from a high-precision evaluation of 1/(1+e^-1).
  CHECK(std::abs(sigmoid(1.0) - 0.7310585786300049) <= 1e-10);
  CHECK(sigmoid(700.0) == 1.0);
  CHECK(sigmoid(-700.0) >= 0.0);
  CHECK(sigmoid(-700.0) <= 1e-300);
}

TEST_CASE("er graph: endpoints of the probability range") {
  Stream rng(111, 0, "btl-test");
  const auto full = sample_er_graph(6, 1.0, rng);
  CHECK(static_cast<int>(full.edges.size()) == 15);
  const auto empty = sample_er_graph(6, 0.0, rng);
  CHECK(empty.edges.empty());
  CHECK_THROWS_AS(sample_er_graph(6, 1.5, rng), error);
}

TEST_CASE("er graph: edge counts concentrate at p * C(m,2)") {
  const int batches = 30;
  double total = 0.0;
  for (int b = 0; b < batches; ++b) {
    Stream rng(112, b, "btl-test");
    total += static_cast<double>(sample_er_graph(50, 0.3, rng).edges.size());
  }
  const double mean = total / batches;
  const double sigma = std::sqrt(1225 * 0.3 * 0.7 / batches);
  CHECK(std::abs(mean - 0.3 * 1225) <= 3 * sigma);
}

TEST_CASE("comparisons: equal scores give empirical frequency near one half") {
  Stream rng(113, 0, "btl-test");
  ObservationGraph g{2, {{0, 1}}, 1.0};
  const auto data = simulate_comparisons({1.0, 1.0}, g, 10000, rng);
  CHECK(std::abs(data.y[0] - 0.5) <= 3 * 0.005);
}

TEST_CASE("comparisons: a ten-point gap is nearly deterministic") {
  Stream rng(114, 0, "btl-test");
  ObservationGraph g{2, {{0, 1}}, 1.0};
  const auto data = simulate_comparisons({5.0, -5.0}, g, 100, rng);
  CHECK(data.y[0] >= 0.99);
}

TEST_CASE("comparisons: empty graph produces empty data") {
  Stream rng(115, 0, "btl-test");
  ObservationGraph g{3, {}, 0.0};
  const auto data = simulate_comparisons({0.0, 0.0, 0.0}, g, 10, rng);
  CHECK(data.y.empty());
}

TEST_CASE("mle: symmetric frequencies return the zero vector") {
  ObservationGraph g{3, {{0, 1}, {1, 2}}, 1.0};
  ComparisonData data{g, 2, {0.5, 0.5}};
  const auto est = mle_estimate(data, 3.0);
  for (double v : est.theta) CHECK(v == 0.0);
}

TEST_CASE("mle: single-edge logit inversion") {
  ObservationGraph g{2, {{0, 1}}, 1.0};
  ComparisonData data{g, 1, {sigmoid(1.0)}};
  const auto est = mle_estimate(data, 2.0);
  CHECK(std::abs(est.theta[0] - 0.5) <= 1e-6);
  CHECK(std::abs(est.theta[1] + 0.5) <= 1e-6);
}

TEST_CASE("mle: exact frequencies on a path recover the scores") {
  ObservationGraph g{3, {{0, 1}, {1, 2}}, 1.0};
  const std::vector<double> star = {1.0, 0.0, -1.0};
  const auto data = exact_frequencies(star, g);
  const auto est = mle_estimate(data, 3.0);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(est.theta[j] - star[j]) <= 1e-6);
  est.check_centered();
}

TEST_CASE("mle: objective decreases monotonically to a flat gradient") {
  Stream rng(116, 0, "btl-test");
  const auto g = sample_er_graph(12, 0.6, rng);
  REQUIRE(g.connected());
  std::vector<double> theta(12);
  double mean = 0.0;
  for (auto& v : theta) { v = rng.next_double(-1.0, 1.0); mean += v; }
  for (auto& v : theta) v -= mean / 12;
  const auto data = simulate_comparisons(theta, g, 200, rng);

  std::vector<double> trace;
  MleOptions opts;
  opts.objective_trace = &trace;
  const auto est = mle_estimate(data, 12 * 0.6, opts);
  REQUIRE(trace.size() >= 2);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
  CHECK(btl_grad_inf(data, est.theta, 12 * 0.6) <= 1e-8);
  est.check_centered();
}

TEST_CASE("mle: disconnected graphs name their components") {
  ObservationGraph g{4, {{0, 1}, {2, 3}}, 0.5};
  ComparisonData data{g, 1, {0.5, 0.5}};
  try {
    mle_estimate(data, 2.0);
    FAIL("expected identifiability error");
  } catch (const error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("disconnected") != std::string::npos);
    CHECK(msg.find("{0,1}") != std::string::npos);
    CHECK(msg.find("{2,3}") != std::string::npos);
  }
}

TEST_CASE("mle: fully separable data stays finite inside the clamp box") {
  ObservationGraph g{2, {{0, 1}}, 1.0};
  ComparisonData data{g, 5, {1.0}};
  const auto est = mle_estimate(data, 2.0);
  CHECK(std::isfinite(est.theta[0]));
  CHECK(est.theta[0] <= 30.0 + 1e-9);
  CHECK(est.theta[0] >= 10.0);  // pushed far out before the gradient flattens

  // A tighter box pins the iterate exactly on its edge.
  MleOptions tight;
  tight.clamp = 5.0;
  const auto pinned = mle_estimate(data, 2.0, tight);
  CHECK(pinned.theta[0] == 5.0);
  CHECK(pinned.theta[1] == -5.0);
}

TEST_CASE("centering: rows sum to zero and respect the (-1,1) range") {
  ValuationMatrix v(2, 2, {1, 0, 0.25, 0.25});
  const auto centered = center_values(v);
  CHECK(centered[0].theta[0] == doctest::Approx(0.5));
  CHECK(centered[0].theta[1] == doctest::Approx(-0.5));
  CHECK(centered[1].theta[0] == 0.0);
  CHECK(centered[1].theta[1] == 0.0);

  Stream rng(117, 0, "btl-test");
  std::vector<double> vals(60);
  for (auto& x : vals) x = rng.next_double();
  const auto rows = center_values(ValuationMatrix(3, 20, std::move(vals)));
  for (const auto& row : rows) {
    row.check_centered();
    for (double t : row.theta) {
      CHECK(t > -1.0);
      CHECK(t < 1.0);
    }
  }
}

TEST_CASE("btl pipeline: measured error certifies the envy bound") {
  Stream rng(118, 0, "btl-test");
  std::vector<double> vals(2 * 12);
  for (auto& x : vals) x = rng.next_double();
  ValuationMatrix truth(2, 12, std::move(vals), std::make_pair(0.0, 1.0));
  Stream pipeline_rng(119, 0, "btl-test");
  const auto [alloc, diag] = btl_fair_divide(truth, 1.0, 400, pipeline_rng);
  CHECK(is_balanced(alloc, 12, 2));
  CHECK(diag.max_true_envy <=
        rr_envy_bound(2, 12, diag.max_linf_error, 1.0) + 1e-12);
}

TEST_CASE("btl pipeline: shifting one agent's values changes nothing") {
  // Values on a 1/64 grid with a power-of-two item count make the
  // centering arithmetic exact, so the shifted run replays bit for bit.
  const int n = 2, m = 32;
  Stream val_rng(120, 0, "btl-test");
  std::vector<double> vals(static_cast<std::size_t>(n) * m);
  for (auto& x : vals) x = static_cast<double>(val_rng.next_below(65)) / 64.0;

  std::vector<double> shifted = vals;
  for (int j = 0; j < m; ++j) shifted[j] += 1.0;

  ValuationMatrix truth(n, m, vals);
  ValuationMatrix truth_shifted(n, m, shifted);

  Stream rng_a(121, 7, "btl-test");
  Stream rng_b(121, 7, "btl-test");
  const auto [alloc_a, diag_a] = btl_fair_divide(truth, 0.9, 50, rng_a);
  const auto [alloc_b, diag_b] = btl_fair_divide(truth_shifted, 0.9, 50, rng_b);
  CHECK(alloc_a == alloc_b);
  CHECK(diag_a.max_linf_error == diag_b.max_linf_error);
}

TEST_CASE("btl pipeline: input validation") {
  Stream rng(122, 0, "btl-test");
  CHECK_THROWS_AS(btl_fair_divide(ValuationMatrix::constant(2, 1, 0.5), 1.0, 10, rng),
                  error);
  CHECK_THROWS_AS(btl_fair_divide(ValuationMatrix::constant(3, 3, 0.5), 1.0, 10, rng),
                  error);
}

TEST_CASE("comparison data csv columns and round trip") {
  ObservationGraph g{3, {{0, 2}}, 1.0};
  ComparisonData data{g, 4, {0.75}};
  std::ostringstream os;
  data.write_csv(os, 2);
  CHECK(os.str() == "agent,item_j,item_k,wins_j,K\n2,1,3,3,4\n");

  Stream rng(123, 0, "btl-test");
  const auto graph = sample_er_graph(8, 0.6, rng);
  const auto original = simulate_comparisons(
      std::vector<double>(8, 0.0), graph, 16, rng);
  std::stringstream ss;
  original.write_csv(ss);
  const auto back = ComparisonData::read_csv(ss);
  REQUIRE(back.graph.edges == original.graph.edges);
  CHECK(back.K == original.K);
  for (std::size_t e = 0; e < original.y.size(); ++e)
    CHECK(back.y[e] == doctest::Approx(original.y[e]).epsilon(1e-12));
}

TEST_CASE("btl pipeline: the certified envy budget scales like 1/sqrt(K)") {
  // The realized signed envy of the picking allocator does not track the
  // noise level at this scale (it sits at the structural first-picker
  // gap, or well below zero); what quadrupling K halves is the envy
  // certificate the measured error yields. Realized envy must stay under
  // the shrinking certificate at both levels.
  const int trials = 30, n = 2, m = 60;
  MleOptions fast;
  fast.grad_tol = 1e-7;
  std::vector<double> budget_k, budget_4k;
  for (int t = 0; t < trials; ++t) {
    Stream inst_rng(124, t, "btl-test");
    std::vector<double> vals(static_cast<std::size_t>(n) * m);
    for (auto& v : vals) v = inst_rng.next_double();
    const ValuationMatrix truth(n, m, vals, std::make_pair(0.0, 1.0));
    for (int variant = 0; variant < 2; ++variant) {
      Stream run_rng(125, t, variant == 0 ? "btl-test/K" : "btl-test/4K");
      const auto [alloc, diag] =
          btl_fair_divide(truth, 0.5, variant == 0 ? 250 : 1000, run_rng, fast);
      const double budget = 2.0 * diag.max_linf_error * ((m + n - 1) / n);
      CHECK(diag.max_true_envy <= budget + 1.0);  // theorem at b = 1
      (variant == 0 ? budget_k : budget_4k).push_back(budget);
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  };
  const double ratio = median(budget_k) / median(budget_4k);
  CHECK(ratio >= 1.5);
  CHECK(ratio <= 2.8);
}
