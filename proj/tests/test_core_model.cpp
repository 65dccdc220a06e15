#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "doseopt/core_model.hpp"
#include "doseopt/error.hpp"

using namespace doseopt;

namespace {

const UtilityTable kDefault = UtilityTable::paper_default();

}  // namespace

TEST_CASE("utility_brt worked values") {
  // (no-tox, eff) .5, (no-tox, no-eff) .15, (tox, eff) .25, (tox, no-eff) .1
  const OutcomeProbVector p(0.15, 0.5, 0.1, 0.25);
  CHECK(utility_brt(p, kDefault) == 71.0);
  CHECK(utility_brt(OutcomeProbVector(0, 1, 0, 0), kDefault) == 100.0);
  CHECK(utility_brt(OutcomeProbVector(0.25, 0.25, 0.25, 0.25), kDefault) == doctest::Approx(50.0));
}

TEST_CASE("invalid probability vectors are rejected") {
  CHECK_THROWS_AS(OutcomeProbVector(0.5, 0.5, 0.5, -0.5), Error);
  CHECK_THROWS_AS(OutcomeProbVector(0.3, 0.3, 0.3, 0.3), Error);
  try {
    OutcomeProbVector(0.2, 0.2, 0.2, 0.2);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidProbability);
  }
}

TEST_CASE("utility table validation and additivity") {
  CHECK(kDefault.additive());
  CHECK_FALSE(UtilityTable(30, 100, 0, 60).additive());
  CHECK_THROWS_AS(UtilityTable(40, 100, 70, 60), Error);   // u10 > u11
  CHECK_THROWS_AS(UtilityTable(40, 100, 0, 120), Error);   // out of range
  CHECK_THROWS_AS(UtilityTable(40, 50, 0, 60), Error);     // u01 not the best
}

TEST_CASE("linear_brt") {
  CHECK(linear_brt(0.5, 0.0, {1.0}) == 0.5);
  CHECK(linear_brt(0.5, 0.1, {1.0}) > linear_brt(0.5, 0.2, {1.0}));
  CHECK(linear_brt(0.3, 0.3, {1.0}) == 0.0);
  CHECK_THROWS_AS(linear_brt(0.3, 0.3, {0.0}), Error);
  CHECK_THROWS_AS(linear_brt(1.3, 0.3, {1.0}), Error);
}

TEST_CASE("quasi_events closed form") {
  CHECK(quasi_events(0, 0, 0, kDefault) == 0.0);
  CHECK(quasi_events(6, 1, 3, kDefault) == doctest::Approx(3.8).epsilon(1e-15));
  // Tied rows of the published table share a score because their masses are equal.
  CHECK(quasi_events(6, 0, 1, kDefault) == quasi_events(6, 3, 3, kDefault));
  CHECK(quasi_events(6, 0, 1, kDefault) == 3.0);
  CHECK_THROWS_AS(quasi_events(3, 4, 0, kDefault), Error);
}

TEST_CASE("non-additive tables are refused by the marginal API") {
  const UtilityTable u(30, 100, 0, 60);
  try {
    quasi_events(3, 1, 1, u);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonAdditiveUtility);
    CHECK(std::string(e.what()).find("quasi_events_joint") != std::string::npos);
  }
  CHECK(quasi_events_joint(1, 1, 1, 0, u) == doctest::Approx(1.3));
}

TEST_CASE("property: marginal quasi-events equal every consistent joint table (n <= 8)") {
  for (const UtilityTable& u : {kDefault, UtilityTable(50, 100, 10, 60), UtilityTable(0, 100, 0, 100)}) {
    REQUIRE(u.additive());
    for (int n = 0; n <= 8; ++n) {
      for (int n11 = 0; n11 <= n; ++n11) {
        for (int n10 = 0; n11 + n10 <= n; ++n10) {
          for (int n01 = 0; n11 + n10 + n01 <= n; ++n01) {
            const int n00 = n - n11 - n10 - n01;
            const double joint = quasi_events_joint(n00, n01, n10, n11, u);
            const double marginal = quasi_events(n, n10 + n11, n01 + n11, u);
            REQUIRE(marginal == doctest::Approx(joint).epsilon(1e-14));
            REQUIRE(marginal >= 0.0);
            REQUIRE(marginal <= n + 1e-12);
          }
        }
      }
    }
  }
}

TEST_CASE("property: quasi-events monotone in efficacy and toxicity") {
  for (int n = 1; n <= 12; ++n) {
    for (int t = 0; t <= n; ++t) {
      for (int e = 0; e <= n; ++e) {
        if (e < n) CHECK(quasi_events(n, t, e + 1, kDefault) >= quasi_events(n, t, e, kDefault));
        if (t < n) CHECK(quasi_events(n, t + 1, e, kDefault) <= quasi_events(n, t, e, kDefault));
      }
    }
  }
}

TEST_CASE("property: utility_brt invariant under simultaneous relabeling") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    double w[4], s = 0;
    for (double& x : w) s += (x = unif(rng));
    const double p[4] = {w[0] / s, w[1] / s, w[2] / s, 1.0 - (w[0] + w[1] + w[2]) / s};
    const double u[4] = {40, 100, 0, 60};
    int perm[4] = {0, 1, 2, 3};
    std::shuffle(perm, perm + 4, rng);
    double direct = 0, relabeled = 0;
    for (int k = 0; k < 4; ++k) {
      direct += p[k] * u[k];
      relabeled += p[perm[k]] * u[perm[k]];
    }
    CHECK(relabeled == doctest::Approx(direct).epsilon(1e-13));
    CHECK(utility_brt(OutcomeProbVector(p[0], p[1], p[2], p[3]), kDefault) ==
          doctest::Approx(direct).epsilon(1e-13));
  }
}

TEST_CASE("property: per-patient utility equals expected quasi-event mass under independence") {
  for (double pt = 0.0; pt <= 1.0; pt += 0.125) {
    for (double pe = 0.0; pe <= 1.0; pe += 0.125) {
      const OutcomeProbVector p(independent_cells(pt, pe));
      // E[quasi_events(1, y_T, y_E)] over the product measure.
      double expected = 0.0;
      for (int t = 0; t < 2; ++t) {
        for (int e = 0; e < 2; ++e) expected += p(t, e) * quasi_events(1, t, e, kDefault);
      }
      CHECK(std::abs(utility_brt(p, kDefault) / 100.0 - expected) < 1e-12);
    }
  }
}

TEST_CASE("benchmark utility") {
  CHECK(benchmark_utility(0.35, 0.25, kDefault) == doctest::Approx(41.0).epsilon(1e-14));
  CHECK(benchmark_utility(0.0, 1.0, kDefault) == 100.0);
  CHECK(benchmark_utility(1.0, 0.0, kDefault) == 0.0);
}
