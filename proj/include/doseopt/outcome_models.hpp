#pragma once

// Truth scenarios and correlated (toxicity, efficacy) outcome generation:
// logistic dose-response curves and the Gumbel-Morgenstern joint pmf.

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <vector>

#include "doseopt/core_model.hpp"

namespace doseopt {

// Association factor (e^psi - 1) / (e^psi + 1), computed without overflow.
double association_factor(double psi);

// Cells (y_T, y_E) = product measure + (-1)^(y_T + y_E) pi_E(1-pi_E) pi_T(1-pi_T) * factor.
// Throws kInvalidPmf naming the first negative cell; only reachable when
// |factor| > 1, since the copula itself keeps every cell nonnegative.
OutcomeProbVector joint_pmf_factor(double pi_t, double pi_e, double factor);
OutcomeProbVector joint_pmf(double pi_t, double pi_e, double psi);

// Deterministic per-replication stream: splitmix64(seed, stream) seeds a Mersenne twister.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);
  // Uniform on [0, 1) with 53 random bits.
  double uniform();

 private:
  std::mt19937_64 engine_;
};

Outcome sample_outcome(Rng& rng, const OutcomeProbVector& pmf);
Outcome sample_outcome(Rng& rng, double pi_t, double pi_e, double psi);

struct DoseScenario {
  Eigen::ArrayXd pi_t;
  Eigen::ArrayXd pi_e;
  double psi = 0.0;

  int size() const { return static_cast<int>(pi_t.size()); }
  // Checks shapes, ranges and every per-dose pmf.
  void validate() const;
  OutcomeProbVector pmf(int dose) const { return joint_pmf(pi_t(dose), pi_e(dose), psi); }
};

enum class DoseStandardization { kLogCentered, kCentered, kRaw };

struct EffToxCurves {
  double gamma0 = 0.0;
  double gamma1 = 1.0;  // toxicity slope, must be > 0
  double beta0 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  DoseStandardization standardization = DoseStandardization::kLogCentered;
};

Eigen::ArrayXd standardize_doses(const std::vector<double>& doses, DoseStandardization rule);

// logit(pi_T) = gamma0 + gamma1 x, logit(pi_E) = beta0 + beta1 x + beta2 x^2.
DoseScenario curves_to_scenario(const EffToxCurves& c, const std::vector<double>& doses,
                                double psi);

}  // namespace doseopt
