#pragma once

// Request handlers shared by the command-line tool and the HTTP service, so
// both paths run the same code on the same inputs.

#include <optional>
#include <string>
#include <vector>

#include "doseopt/conduct.hpp"
#include "doseopt/config.hpp"
#include "doseopt/error.hpp"

namespace doseopt {

struct ApiError {
  std::string code;
  std::string message;
  std::string field;
  int status = 500;
};

int http_status(ErrorCode code);
// Maps any exception to its error code; JSON syntax errors become validation errors.
ApiError to_api_error(const std::exception& e);
Json to_json(const ApiError& e);

Json api_boundaries(double target, std::optional<double> phi1 = std::nullopt,
                    std::optional<double> phi2 = std::nullopt);
// "λ_e λ_d" to three decimals, as printed by the CLI.
std::string boundaries_line(const Json& boundaries);

// Patient counts tabulated when none are given: multiples of the cohort size up to N*.
std::vector<int> default_n_values(const Boin12Config& cfg);
std::string api_rds_table_csv(const Json& config, const std::vector<int>& n_values = {});
Json api_calibrate(const std::string& reference_csv, const Json& config);

Json api_merit_search(const Json& spec);
Json api_merit_variants();

Json api_brt(const std::vector<double>& probs, const Json& utility);
Json api_advise(int J, const std::string& strategy, int arms = 2);

Json api_simulate(const Json& sim_config);
std::string api_simulate_csv(const Json& sim_config);

// Trial endpoints; bodies and results use 1-based dose numbers.
Json api_create_trial(TrialStore& store, const Json& body);
Json api_record_cohort(TrialStore& store, const std::string& id, const Json& body);
Json api_close_trial(TrialStore& store, const std::string& id, const Json& body);
Json api_get_trial(const TrialStore& store, const std::string& id);
Json api_audit(const TrialStore& store, const std::string& id);

}  // namespace doseopt
