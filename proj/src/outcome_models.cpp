#include "doseopt/outcome_models.hpp"

#include <cmath>
#include <string>

#include "doseopt/error.hpp"

namespace doseopt {

double association_factor(double psi) {
  require(!std::isnan(psi), ErrorCode::kValidation, "psi must be a number", "psi");
  return std::tanh(psi / 2.0);
}

OutcomeProbVector joint_pmf_factor(double pi_t, double pi_e, double factor) {
  check_probability(pi_t, "pi_T");
  check_probability(pi_e, "pi_E");
  require(std::isfinite(factor), ErrorCode::kValidation, "association factor must be finite",
          "psi");
  const double shift = pi_e * (1.0 - pi_e) * pi_t * (1.0 - pi_t) * factor;
  Matrix2 cells = independent_cells(pi_t, pi_e);
  cells(0, 0) += shift;
  cells(0, 1) -= shift;
  cells(1, 0) -= shift;
  cells(1, 1) += shift;
  for (int t = 0; t < 2; ++t) {
    for (int e = 0; e < 2; ++e) {
      if (cells(t, e) < 0.0) {
        const std::string cell = "p" + std::to_string(t) + std::to_string(e);
        throw Error(ErrorCode::kInvalidPmf,
                    "joint pmf cell " + cell + " is negative (" + std::to_string(cells(t, e)) +
                        ")",
                    cell);
      }
    }
  }
  return OutcomeProbVector(cells);
}

OutcomeProbVector joint_pmf(double pi_t, double pi_e, double psi) {
  return joint_pmf_factor(pi_t, pi_e, association_factor(psi));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

Outcome sample_outcome(Rng& rng, const OutcomeProbVector& pmf) {
  const double u = rng.uniform();
  double acc = 0.0;
  // Cell order 00, 01, 10, 11; the last cell absorbs rounding.
  for (int t = 0; t < 2; ++t) {
    for (int e = 0; e < 2; ++e) {
      acc += pmf(t, e);
      if (u < acc || (t == 1 && e == 1)) {
        return {static_cast<std::uint8_t>(t), static_cast<std::uint8_t>(e)};
      }
    }
  }
  return {1, 1};
}

Outcome sample_outcome(Rng& rng, double pi_t, double pi_e, double psi) {
  return sample_outcome(rng, joint_pmf(pi_t, pi_e, psi));
}

void DoseScenario::validate() const {
  require(pi_t.size() >= 1, ErrorCode::kValidation, "scenario needs at least one dose", "pi_T");
  require(pi_t.size() == pi_e.size(), ErrorCode::kValidation,
          "pi_T and pi_E must have the same length", "pi_E");
  for (int j = 0; j < size(); ++j) {
    try {
      pmf(j);
    } catch (const Error& e) {
      const std::string field = e.field().empty() ? "" : "." + e.field();
      throw Error(e.code(), "dose " + std::to_string(j + 1) + ": " + e.what(),
                  "doses[" + std::to_string(j) + "]" + field);
    }
  }
}

Eigen::ArrayXd standardize_doses(const std::vector<double>& doses, DoseStandardization rule) {
  require(!doses.empty(), ErrorCode::kValidation, "dose grid is empty", "doses");
  for (size_t i = 0; i < doses.size(); ++i) {
    require(std::isfinite(doses[i]) && doses[i] > 0.0, ErrorCode::kValidation,
            "doses must be positive", "doses[" + std::to_string(i) + "]");
    require(i == 0 || doses[i] > doses[i - 1], ErrorCode::kValidation,
            "doses must be strictly increasing", "doses[" + std::to_string(i) + "]");
  }
  Eigen::ArrayXd x = Eigen::Map<const Eigen::ArrayXd>(doses.data(), doses.size());
  switch (rule) {
    case DoseStandardization::kLogCentered:
      x = x.log();
      return x - x.mean();
    case DoseStandardization::kCentered:
      return x - x.mean();
    case DoseStandardization::kRaw:
      return x;
  }
  return x;
}

DoseScenario curves_to_scenario(const EffToxCurves& c, const std::vector<double>& doses,
                                double psi) {
  require(std::isfinite(c.gamma1) && c.gamma1 > 0.0, ErrorCode::kValidation,
          "toxicity slope gamma1 must be positive", "gamma1");
  const Eigen::ArrayXd x = standardize_doses(doses, c.standardization);
  auto logistic = [](const Eigen::ArrayXd& eta) { return 1.0 / (1.0 + (-eta).exp()); };
  DoseScenario s;
  s.pi_t = logistic(c.gamma0 + c.gamma1 * x);
  s.pi_e = logistic(c.beta0 + c.beta1 * x + c.beta2 * x.square());
  s.psi = psi;
  for (int j = 1; j < s.size(); ++j) {
    require(s.pi_t(j) >= s.pi_t(j - 1), ErrorCode::kValidation,
            "toxicity is not monotone over the dose grid", "doses[" + std::to_string(j) + "]");
  }
  s.validate();
  return s;
}

}  // namespace doseopt
