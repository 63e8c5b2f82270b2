#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fairdiv/core.hpp"
#include "fairdiv/rng.hpp"

using namespace fairdiv;

namespace {

ValuationMatrix random_matrix(int n, int m, Stream& rng, double lo = 0.0,
                              double hi = 1.0) {
  std::vector<double> v(static_cast<std::size_t>(n) * m);
  for (auto& x : v) x = rng.next_double(lo, hi);
  return ValuationMatrix(n, m, std::move(v));
}

Allocation random_allocation(int n, int m, Stream& rng) {
  std::vector<int> owner(m);
  for (auto& o : owner) o = static_cast<int>(rng.next_below(n));
  return Allocation::from_owners(n, owner);
}

// Independent EF1 check: literal one-item-removal enumeration.
bool ef1_by_enumeration(const ValuationMatrix& v, const Allocation& a) {
  for (int i = 0; i < v.n(); ++i) {
    const double own = v.bundle_value(i, a.bundle(i));
    for (int j = 0; j < v.n(); ++j) {
      if (i == j || a.bundle(j).empty()) continue;
      bool ok = false;
      for (int removed : a.bundle(j)) {
        double rest = 0.0;
        for (int g : a.bundle(j))
          if (g != removed) rest += v.at(i, g);
        if (own >= rest - kEnvyTol) {
          ok = true;
          break;
        }
      }
      if (!ok) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("envy report: separable two-agent instance is envy-free") {
  ValuationMatrix v(2, 2, {1, 0, 0, 1});
  Allocation a(2, 2, {{0}, {1}});
  const EnvyReport rep = envy_report(v, a);
  CHECK(rep.max_envy == doctest::Approx(-1.0));
  CHECK(rep.is_envy_free);
  CHECK(rep.is_ef1);
}

TEST_CASE("envy report: all-zero values are envy-free under any partition") {
  ValuationMatrix v(2, 3, std::vector<double>(6, 0.0));
  Allocation a(2, 3, {{0, 2}, {1}});
  const EnvyReport rep = envy_report(v, a);
  CHECK(rep.max_envy == doctest::Approx(0.0));
  CHECK(rep.is_envy_free);
}

TEST_CASE("envy report: everything-to-one-agent") {
  ValuationMatrix v(2, 2, {3, 1, 2, 2});
  Allocation a(2, 2, {{0, 1}, {}});
  const EnvyReport rep = envy_report(v, a);
  CHECK(rep.envy(1, 0) == doctest::Approx(4.0));
  CHECK_FALSE(rep.is_envy_free);
  CHECK_FALSE(rep.is_ef1);
  CHECK(rep.is_ef1 == ef1_by_enumeration(v, a));
}

TEST_CASE("envy report: diagonal is zero and max matches off-diagonal scan") {
  Stream rng(11, 0, "core-test");
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(4));
    const int m = 1 + static_cast<int>(rng.next_below(10));
    const auto v = random_matrix(n, m, rng);
    const auto a = random_allocation(n, m, rng);
    const EnvyReport rep = envy_report(v, a);
    double worst = rep.envy(0, 1);
    for (int i = 0; i < n; ++i) {
      CHECK(rep.envy(i, i) == 0.0);
      for (int j = 0; j < n; ++j)
        if (i != j) worst = std::max(worst, rep.envy(i, j));
    }
    CHECK(rep.max_envy == doctest::Approx(worst));
    CHECK(rep.is_ef1 == ef1_by_enumeration(v, a));
  }
}

TEST_CASE("envy report: dimension mismatch and bad partitions are rejected") {
  ValuationMatrix v(2, 2, {1, 0, 0, 1});
  CHECK_THROWS_AS(envy_report(v, Allocation(2, 3, {{0, 1}, {2}})), error);
  CHECK_THROWS_AS(Allocation(2, 2, {{0}, {0}}), error);       // duplicated item
  CHECK_THROWS_AS(Allocation(2, 2, {{0}, {}}), error);        // missing item
  CHECK_THROWS_AS(Allocation(2, 2, {{0}, {5}}), error);       // out of range
}

TEST_CASE("constant shift of one agent's values moves envy by c*(|A_j|-|A_i|)") {
  Stream rng(12, 0, "core-test");
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(3));
    const int m = 2 + static_cast<int>(rng.next_below(8));
    const auto v = random_matrix(n, m, rng);
    const auto a = random_allocation(n, m, rng);
    const double c = rng.next_double(-2.0, 2.0);
    const int agent = static_cast<int>(rng.next_below(n));

    std::vector<double> shifted = v.values();
    for (int j = 0; j < m; ++j) shifted[agent * m + j] += c;
    const ValuationMatrix vs(n, m, std::move(shifted));

    const EnvyReport before = envy_report(v, a);
    const EnvyReport after = envy_report(vs, a);
    for (int j = 0; j < n; ++j) {
      if (j == agent) continue;
      const double delta =
          c * (static_cast<double>(a.bundle(j).size()) - a.bundle(agent).size());
      CHECK(after.envy(agent, j) ==
            doctest::Approx(before.envy(agent, j) + delta).epsilon(1e-9));
      if (a.bundle(j).size() == a.bundle(agent).size())
        CHECK(after.envy(agent, j) == doctest::Approx(before.envy(agent, j)));
    }
  }
}

TEST_CASE("is_balanced checks bundle cardinalities") {
  CHECK(is_balanced(Allocation(2, 4, {{0, 1}, {2, 3}}), 4, 2));
  CHECK(is_balanced(Allocation(2, 5, {{0, 1, 2}, {3, 4}}), 5, 2));
  CHECK_FALSE(is_balanced(Allocation(2, 4, {{0, 1, 2}, {3}}), 4, 2));
}

TEST_CASE("valuation matrix validates shape, finiteness and declared range") {
  CHECK_THROWS_AS(ValuationMatrix(2, 2, {1, 2, 3}), error);
  CHECK_THROWS_AS(ValuationMatrix(2, 2, {1, 2, 3, std::nan("")}), error);
  CHECK_THROWS_AS(
      ValuationMatrix(1, 2, {0.5, 1.5}, std::make_pair(0.0, 1.0)), error);
  const ValuationMatrix ok(1, 2, {0.5, 0.75}, std::make_pair(0.0, 1.0));
  CHECK(ok.bound_b() == 1.0);
}

TEST_CASE("valuation matrix csv round trip") {
  ValuationMatrix v(2, 3, {1, 0.5, 0, 0.25, 2, 1.5});
  std::stringstream ss;
  v.write_csv(ss);
  const ValuationMatrix back = ValuationMatrix::read_csv(ss);
  REQUIRE(back.n() == 2);
  REQUIRE(back.m() == 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(back.at(i, j) == v.at(i, j));
}

TEST_CASE("noisy instance validates shapes and the declared bound") {
  ValuationMatrix truth(2, 2, {1, 0, 0, 1});
  ValuationMatrix est(2, 2, {0.9, 0.1, 0.1, 0.9});
  NoisyInstance inst(truth, est, 0.1);
  CHECK(inst.realized_noise_bound() == doctest::Approx(0.1));
  CHECK_NOTHROW(inst.assert_bound());

  NoisyInstance tight(truth, est, 0.05);
  CHECK_THROWS_AS(tight.assert_bound(), error);
  CHECK_THROWS_AS(NoisyInstance(truth, ValuationMatrix(2, 3, std::vector<double>(6, 0.0)), 0.1),
                  error);
}
