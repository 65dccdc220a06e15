#include "doseopt/boin_rules.hpp"

#include <cmath>
#include <cstdio>

#include "doseopt/error.hpp"
#include "doseopt/special.hpp"

namespace doseopt {

BoinBoundaries lambda_bounds(double phi, double phi1, double phi2) {
  require(phi1 > 0.0 && phi1 < phi, ErrorCode::kValidation, "need 0 < phi1 < phi", "phi1");
  require(phi < phi2 && phi2 < 1.0, ErrorCode::kValidation, "need phi < phi2 < 1", "phi2");
  BoinBoundaries b{phi, phi1, phi2, 0.0, 0.0};
  b.lambda_e = std::log((1.0 - phi1) / (1.0 - phi)) /
               std::log(phi * (1.0 - phi1) / (phi1 * (1.0 - phi)));
  b.lambda_d = std::log((1.0 - phi) / (1.0 - phi2)) /
               std::log(phi2 * (1.0 - phi) / (phi * (1.0 - phi2)));
  return b;
}

BoinBoundaries lambda_bounds(double phi) {
  require(phi > 0.0 && phi < 1.0 / 1.4, ErrorCode::kValidation,
          "target must lie in (0, 1/1.4) for the default references", "phi");
  return lambda_bounds(phi, 0.6 * phi, 1.4 * phi);
}

BoundaryZone classify(int n, int n_tox, const BoinBoundaries& b) {
  require(n >= 1 && n_tox >= 0 && n_tox <= n, ErrorCode::kValidation,
          "boundary comparison needs 0 <= x_T <= n and n >= 1", "counts");
  // Cross-multiplied so x_T / n is never rounded before the comparison.
  const double x = n_tox;
  if (x <= b.lambda_e * n) return BoundaryZone::kEscalate;
  if (x >= b.lambda_d * n) return BoundaryZone::kDeescalate;
  return BoundaryZone::kStay;
}

std::string to_string(BoundaryZone zone) {
  switch (zone) {
    case BoundaryZone::kEscalate: return "escalate";
    case BoundaryZone::kStay: return "stay";
    case BoundaryZone::kDeescalate: return "deescalate";
  }
  return "unknown";
}

void EliminationConfig::validate() const {
  require(phi_t_limit > 0.0 && phi_t_limit < 1.0, ErrorCode::kInvalidProbability,
          "toxicity limit must lie in (0, 1)", "elimination.phi_T_limit");
  require(phi_e_limit > 0.0 && phi_e_limit < 1.0, ErrorCode::kInvalidProbability,
          "efficacy limit must lie in (0, 1)", "elimination.phi_E_limit");
  require(cutoff > 0.5 && cutoff < 1.0, ErrorCode::kValidation,
          "elimination cutoff must lie in (0.5, 1)", "elimination.cutoff");
  require(min_n >= 1, ErrorCode::kValidation, "min_n must be at least 1", "elimination.min_n");
}

bool eliminate_safety(int n, int n_tox, const EliminationConfig& cfg) {
  require(n >= 0 && n_tox >= 0 && n_tox <= n, ErrorCode::kValidation,
          "need 0 <= x_T <= n", "counts");
  if (n < cfg.min_n) return false;
  return beta_tail(1.0 + n_tox, 1.0 + n - n_tox, cfg.phi_t_limit) > cfg.cutoff;
}

bool eliminate_futility(int n, int n_eff, const EliminationConfig& cfg) {
  require(n >= 0 && n_eff >= 0 && n_eff <= n, ErrorCode::kValidation,
          "need 0 <= x_E <= n", "counts");
  if (n < cfg.min_n) return false;
  return 1.0 - beta_tail(1.0 + n_eff, 1.0 + n - n_eff, cfg.phi_e_limit) > cfg.cutoff;
}

std::vector<double> paper_boundary_targets() { return {0.15, 0.2, 0.25, 0.3, 0.35, 0.4}; }

std::string boundary_table_csv(std::span<const double> targets) {
  std::string header = "Target toxicity rate";
  std::string e_row = "lambda_e";
  std::string d_row = "lambda_d";
  char buf[32];
  for (double phi : targets) {
    const BoinBoundaries b = lambda_bounds(phi);
    std::snprintf(buf, sizeof buf, ",%g", phi);
    header += buf;
    std::snprintf(buf, sizeof buf, ",%.3f", b.lambda_e);
    e_row += buf;
    std::snprintf(buf, sizeof buf, ",%.3f", b.lambda_d);
    d_row += buf;
  }
  return header + "\n" + e_row + "\n" + d_row + "\n";
}

}  // namespace doseopt
