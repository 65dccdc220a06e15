#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doseopt/error.hpp"
#include "doseopt/isotonic.hpp"
#include "doseopt/report.hpp"
#include "doseopt/simulator.hpp"

using namespace doseopt;

namespace {

DoseScenario scenario(std::vector<double> pt, std::vector<double> pe, double psi) {
  DoseScenario s;
  s.pi_t = Eigen::Map<Eigen::ArrayXd>(pt.data(), pt.size());
  s.pi_e = Eigen::Map<Eigen::ArrayXd>(pe.data(), pe.size());
  s.psi = psi;
  return s;
}

void check_bookkeeping(const OperatingCharacteristics& oc) {
  const double sel = std::accumulate(oc.selection_pct.begin(), oc.selection_pct.end(), 0.0);
  CHECK(sel + oc.none_pct == doctest::Approx(100.0));
  const double pts = std::accumulate(oc.avg_patients.begin(), oc.avg_patients.end(), 0.0);
  CHECK(pts == doctest::Approx(oc.avg_total));
  CHECK(oc.eliminated_allocations == 0);
  CHECK(oc.conservation_failures == 0);
}

}  // namespace

TEST_CASE("isotonic regression") {
  const std::vector<double> v{0.1, 0.4, 0.2, 0.5};
  const std::vector<double> w{1, 1, 1, 1};
  const auto fit = isotonic_fit(v, w);
  CHECK(fit[0] == doctest::Approx(0.1));
  CHECK(fit[1] == doctest::Approx(0.3));
  CHECK(fit[2] == doctest::Approx(0.3));
  CHECK(fit[3] == doctest::Approx(0.5));
  const std::vector<double> w2{1, 3, 1, 1};
  CHECK(isotonic_fit(v, w2)[1] == doctest::Approx((0.4 * 3 + 0.2) / 4));
  CHECK(isotonic_fit(std::vector<double>{}, std::vector<double>{}).empty());
  CHECK_THROWS_AS(isotonic_fit(v, std::vector<double>{1, 0, 1, 1}), Error);
}

TEST_CASE("property: isotonic fits are monotone and preserve the weighted mean") {
  Rng rng(9, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 10);
    std::vector<double> v(n), w(n);
    for (int i = 0; i < n; ++i) {
      v[i] = rng.uniform();
      w[i] = 0.1 + rng.uniform();
    }
    const auto fit = isotonic_fit(v, w);
    REQUIRE(std::is_sorted(fit.begin(), fit.end()));
    double a = 0, b = 0;
    for (int i = 0; i < n; ++i) {
      a += v[i] * w[i];
      b += fit[i] * w[i];
    }
    REQUIRE(a == doctest::Approx(b));
  }
}

TEST_CASE("true best dose") {
  const auto s = scenario({0.05, 0.1, 0.15, 0.5}, {0.1, 0.2, 0.6, 0.7}, 0.0);
  CHECK(true_best_dose(s, UtilityTable::paper_default(), 0.35, 0.25) == 2);
  const auto none = scenario({0.8, 0.8}, {0.5, 0.5}, 0.0);
  CHECK(true_best_dose(none, UtilityTable::paper_default(), 0.35, 0.25) == -1);
}

TEST_CASE("identical seeds give byte-identical reports regardless of threads") {
  SimConfig cfg;
  cfg.scenario = scenario({0.05, 0.1, 0.15, 0.3}, {0.1, 0.2, 0.6, 0.6}, 1.0);
  cfg.n_sim = 400;
  cfg.seed = 123;
  cfg.threads = 1;
  const auto a = simulate(cfg);
  cfg.threads = 4;
  const auto b = simulate(cfg);
  cfg.threads = 1;
  CHECK(oc_csv(a, cfg) == oc_csv(b, cfg));
  cfg.seed = 124;
  CHECK(oc_csv(simulate(cfg), cfg) != oc_csv(a, cfg));
}

TEST_CASE("overly toxic scenario stops without a selection") {
  SimConfig cfg;
  cfg.scenario = scenario({0.8, 0.8, 0.8, 0.8}, {0.3, 0.4, 0.5, 0.6}, 0.0);
  cfg.n_sim = 2000;
  cfg.seed = 7;
  const auto oc = simulate(cfg);
  CHECK(oc.none_pct >= 95.0);
  CHECK(oc.best_dose == -1);
  CHECK(oc.early_stop_pct >= 95.0);
  check_bookkeeping(oc);
}

TEST_CASE("efficacy plateau: the best-utility dose is selected most often") {
  SimConfig cfg;
  cfg.scenario = scenario({0.05, 0.1, 0.15, 0.3}, {0.1, 0.2, 0.6, 0.6}, 1.0);
  cfg.n_sim = 2000;
  cfg.seed = 7;
  const auto oc = simulate(cfg);
  CHECK(oc.best_dose == 2);
  const auto top = std::max_element(oc.selection_pct.begin(), oc.selection_pct.end());
  CHECK(top - oc.selection_pct.begin() == 2);
  CHECK(oc.avg_total <= 36.0);
  check_bookkeeping(oc);
}

TEST_CASE("generator mode runs the same trial as the generated table") {
  SimConfig cfg;
  cfg.scenario = scenario({0.05, 0.1, 0.15, 0.3}, {0.1, 0.2, 0.6, 0.6}, 1.0);
  cfg.n_sim = 300;
  auto body = [&](const OperatingCharacteristics& oc) {
    const std::string csv = oc_csv(oc, cfg);
    return csv.substr(csv.find('\n'));  // drop the config line
  };
  const std::string table = body(simulate(cfg));
  Boin12Config gen;
  gen.mode = EngineMode::kGenerator;
  cfg.design = gen;
  CHECK(body(simulate(cfg)) == table);
}

TEST_CASE("two-stage: carried arms are admissible at the exact rate") {
  SimConfig cfg;
  cfg.scenario = scenario({0.05, 0.1, 0.2, 0.45}, {0.1, 0.1, 0.3, 0.4}, 0.0);
  cfg.design = TwoStageConfig{};
  cfg.n_sim = 4000;
  cfg.seed = 7;
  const auto oc = simulate(cfg);
  check_bookkeeping(oc);
  const MeritDesign d{24, 7, 5};
  bool compared = false;
  for (int j = 0; j < cfg.scenario.size(); ++j) {
    if (oc.carried[j] < 200) continue;
    const double p = accept_prob(d, cfg.scenario.pi_t(j), cfg.scenario.pi_e(j));
    const double se = std::sqrt(p * (1 - p) / oc.carried[j]);
    CHECK(std::abs(oc.admissible_rate[j] - p) <= 3 * se + 1e-12);
    compared = true;
  }
  CHECK(compared);
}

TEST_CASE("two-stage: stage 2 solved from a spec") {
  SimConfig cfg;
  cfg.scenario = scenario({0.05, 0.1, 0.2, 0.45}, {0.1, 0.1, 0.3, 0.4}, 0.0);
  TwoStageConfig ts;
  ts.stage2 = MeritSpec{};
  CHECK(ts.resolved_design() == search(MeritSpec{}).design);
  cfg.design = ts;
  cfg.n_sim = 200;
  check_bookkeeping(simulate(cfg));
}

TEST_CASE("configuration errors") {
  SimConfig cfg;
  cfg.scenario = scenario({0.1, 0.2}, {0.3, 0.4}, 0.0);
  cfg.n_sim = 0;
  CHECK_THROWS_AS(simulate(cfg), Error);
  cfg.n_sim = 10;
  cfg.start_dose = 2;
  CHECK_THROWS_AS(simulate(cfg), Error);
  cfg.start_dose = 0;
  TwoStageConfig ts;
  ts.carry = 0;
  cfg.design = ts;
  CHECK_THROWS_AS(simulate(cfg), Error);
}

TEST_CASE("sample size advice") {
  CHECK(advise_sample_size(4, Strategy::kEfficacyIntegrated) == SampleSizeRange{24, 36});
  CHECK(advise_sample_size(4, Strategy::kTwoStage) == SampleSizeRange{64, 104});
  CHECK(advise_sample_size(5, Strategy::kTwoStage, 3) == SampleSizeRange{90, 150});
  CHECK_THROWS_AS(advise_sample_size(0, Strategy::kTwoStage), Error);
}
