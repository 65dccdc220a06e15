#pragma once

// Interval boundaries for toxicity-driven escalation and the posterior
// admissibility (elimination) rules.

#include <span>
#include <string>
#include <vector>

namespace doseopt {

struct BoinBoundaries {
  double phi = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
  double lambda_e = 0.0;
  double lambda_d = 0.0;
};

// Optimal-interval boundaries; throws unless 0 < phi1 < phi < phi2 < 1.
BoinBoundaries lambda_bounds(double phi, double phi1, double phi2);
// Default references phi1 = 0.6 phi, phi2 = 1.4 phi.
BoinBoundaries lambda_bounds(double phi);

enum class BoundaryZone { kEscalate, kStay, kDeescalate };

// Classifies n_tox / n against the boundaries; escalate iff p <= lambda_e,
// de-escalate iff p >= lambda_d. Requires n >= 1.
BoundaryZone classify(int n, int n_tox, const BoinBoundaries& b);

std::string to_string(BoundaryZone zone);

struct EliminationConfig {
  double phi_t_limit = 0.35;
  double phi_e_limit = 0.25;
  double cutoff = 0.9;
  int min_n = 3;

  void validate() const;
};

// Pr(pi_T > limit | Beta(1 + x_T, 1 + n - x_T)) > cutoff, once n >= min_n.
bool eliminate_safety(int n, int n_tox, const EliminationConfig& cfg);
// Pr(pi_E < limit | Beta(1 + x_E, 1 + n - x_E)) > cutoff, once n >= min_n.
bool eliminate_futility(int n, int n_eff, const EliminationConfig& cfg);

// CSV with one row per boundary (lambda_e, lambda_d) and one column per target.
std::string boundary_table_csv(std::span<const double> targets);
std::vector<double> paper_boundary_targets();

}  // namespace doseopt
