#pragma once

// Outcome semantics, utility tables and benefit-risk tradeoff scores.
//
// Both the utility table and the outcome probabilities are stored as 2x2
// matrices indexed (y_T, y_E): row 0 = no toxicity, row 1 = toxicity,
// column 0 = no efficacy, column 1 = efficacy.

#include <Eigen/Core>

#include <cstdint>

namespace doseopt {

using Matrix2 = Eigen::Matrix2d;

struct Outcome {
  std::uint8_t tox = 0;
  std::uint8_t eff = 0;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

class UtilityTable {
 public:
  // Scores on the 0-100 scale; throws on out-of-range or non-monotone tables.
  UtilityTable(double u00, double u01, double u10, double u11);

  // 100 = (no tox, eff), 60 = (tox, eff), 40 = (no tox, no eff), 0 = (tox, no eff).
  static UtilityTable paper_default() { return {40.0, 100.0, 0.0, 60.0}; }

  double operator()(int tox, int eff) const { return scores_(tox, eff); }
  const Matrix2& scores() const noexcept { return scores_; }

  // u01 + u10 == u11 + u00, i.e. the score decomposes into marginal effects.
  bool additive() const noexcept;

  friend bool operator==(const UtilityTable& a, const UtilityTable& b) {
    return a.scores_ == b.scores_;
  }

 private:
  Matrix2 scores_;
};

class OutcomeProbVector {
 public:
  static constexpr double kSumTolerance = 1e-12;

  OutcomeProbVector(double p00, double p01, double p10, double p11);
  explicit OutcomeProbVector(const Matrix2& cells);

  double operator()(int tox, int eff) const { return cells_(tox, eff); }
  const Matrix2& cells() const noexcept { return cells_; }

  double tox_margin() const { return cells_.row(1).sum(); }
  double eff_margin() const { return cells_.col(1).sum(); }

 private:
  Matrix2 cells_;
};

struct BrtWeights {
  double w = 1.0;
};

// Expected utility sum_k pi_k u_k, on the 0-100 scale.
double utility_brt(const OutcomeProbVector& p, const UtilityTable& u);

// pi_E - w * pi_T.
double linear_brt(double pi_e, double pi_t, BrtWeights weights);

// Quasi-binomial success mass sum_i u_i / 100 implied by marginal counts;
// requires an additive table (see quasi_events_joint otherwise).
double quasi_events(int n, int n_tox, int n_eff, const UtilityTable& u);

// Quasi-events from the full joint table of counts n_{y_T y_E}.
double quasi_events_joint(int n00, int n01, int n10, int n11, const UtilityTable& u);

// Utility of a dose sitting exactly at (phi_T, phi_E) with independent outcomes.
double benchmark_utility(double phi_t, double phi_e, const UtilityTable& u);

// Product-measure pmf for independent toxicity and efficacy.
Matrix2 independent_cells(double pi_t, double pi_e);

void check_probability(double p, const char* field);

}  // namespace doseopt
