#include "doseopt/core_model.hpp"

#include <cmath>
#include <string>

#include "doseopt/error.hpp"

namespace doseopt {

void check_probability(double p, const char* field) {
  require(std::isfinite(p) && p >= 0.0 && p <= 1.0, ErrorCode::kInvalidProbability,
          std::string(field) + " must lie in [0, 1]", field);
}

UtilityTable::UtilityTable(double u00, double u01, double u10, double u11) {
  scores_ << u00, u01, u10, u11;
  const char* names[2][2] = {{"u00", "u01"}, {"u10", "u11"}};
  for (int t = 0; t < 2; ++t) {
    for (int e = 0; e < 2; ++e) {
      const double s = scores_(t, e);
      require(std::isfinite(s) && s >= 0.0 && s <= 100.0, ErrorCode::kValidation,
              "utility scores must lie in [0, 100]", names[t][e]);
    }
  }
  require(u01 >= u11 && u01 >= u00, ErrorCode::kValidation,
          "(no toxicity, efficacy) must be the most desirable outcome", "u01");
  require(u11 >= u10 && u00 >= u10, ErrorCode::kValidation,
          "(toxicity, no efficacy) must be the least desirable outcome", "u10");
}

bool UtilityTable::additive() const noexcept {
  return scores_(0, 1) + scores_(1, 0) == scores_(1, 1) + scores_(0, 0);
}

OutcomeProbVector::OutcomeProbVector(double p00, double p01, double p10, double p11) {
  Matrix2 cells;
  cells << p00, p01, p10, p11;
  *this = OutcomeProbVector(cells);
}

OutcomeProbVector::OutcomeProbVector(const Matrix2& cells) : cells_(cells) {
  for (int t = 0; t < 2; ++t) {
    for (int e = 0; e < 2; ++e) check_probability(cells_(t, e), "probs");
  }
  require(std::abs(cells_.sum() - 1.0) <= kSumTolerance, ErrorCode::kInvalidProbability,
          "outcome probabilities must sum to 1", "probs");
}

double utility_brt(const OutcomeProbVector& p, const UtilityTable& u) {
  return p.cells().cwiseProduct(u.scores()).sum();
}

double linear_brt(double pi_e, double pi_t, BrtWeights weights) {
  check_probability(pi_e, "pi_E");
  check_probability(pi_t, "pi_T");
  require(weights.w > 0.0, ErrorCode::kValidation, "tradeoff weight must be positive", "w");
  return pi_e - weights.w * pi_t;
}

double quasi_events(int n, int n_tox, int n_eff, const UtilityTable& u) {
  require(n >= 0 && n_tox >= 0 && n_tox <= n && n_eff >= 0 && n_eff <= n,
          ErrorCode::kValidation, "counts must satisfy 0 <= x <= n", "counts");
  require(u.additive(), ErrorCode::kNonAdditiveUtility,
          "utility table is not additive; marginal counts do not determine the quasi-events, "
          "use quasi_events_joint with the joint outcome counts",
          "utility");
  const double u00 = u(0, 0);
  // Numerator first so that equal configurations give bit-identical results.
  const double numer = u00 * n + (u(0, 1) - u00) * n_eff - (u00 - u(1, 0)) * n_tox;
  return numer / 100.0;
}

double quasi_events_joint(int n00, int n01, int n10, int n11, const UtilityTable& u) {
  require(n00 >= 0 && n01 >= 0 && n10 >= 0 && n11 >= 0, ErrorCode::kValidation,
          "joint counts must be nonnegative", "counts");
  const double numer = n00 * u(0, 0) + n01 * u(0, 1) + n10 * u(1, 0) + n11 * u(1, 1);
  return numer / 100.0;
}

Matrix2 independent_cells(double pi_t, double pi_e) {
  Eigen::Vector2d tox(1.0 - pi_t, pi_t);
  Eigen::Vector2d eff(1.0 - pi_e, pi_e);
  return tox * eff.transpose();
}

double benchmark_utility(double phi_t, double phi_e, const UtilityTable& u) {
  check_probability(phi_t, "phi_T");
  check_probability(phi_e, "phi_E");
  return independent_cells(phi_t, phi_e).cwiseProduct(u.scores()).sum();
}

}  // namespace doseopt
