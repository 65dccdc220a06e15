#pragma once

// Utility-based interval design: desirability scores, decision tables,
// generator calibration and dose-assignment decisions.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "doseopt/boin_rules.hpp"
#include "doseopt/core_model.hpp"
#include "doseopt/rds_table.hpp"

namespace doseopt {

// Prior Beta(a0, b0) on the standardized mean utility and the benchmark u_b
// whose exceedance probability is the desirability of a dose.
struct RdsGeneratorParams {
  double a0 = 1.0;
  double b0 = 1.0;
  double u_b = 0.7;

  void validate() const;
  // Constants found by calibrating against the published table; the
  // calibration test suite re-derives them.
  static RdsGeneratorParams paper_calibrated();

  friend bool operator==(const RdsGeneratorParams&, const RdsGeneratorParams&) = default;
};

enum class EngineMode { kTableDriven, kGenerator };
enum class TableSource { kGenerated, kPaper };

struct Boin12Config {
  double phi_t = 0.35;
  double phi_e = 0.25;
  BoinBoundaries boundaries = lambda_bounds(0.35);
  UtilityTable utility = UtilityTable::paper_default();
  int n_star = 6;
  int cohort_size = 3;
  int max_per_dose = 12;
  int max_total = 36;
  EliminationConfig elimination{};
  std::optional<RdsGeneratorParams> generator;
  EngineMode mode = EngineMode::kTableDriven;
  TableSource table_source = TableSource::kGenerated;
  bool exploration_override = true;
  // Fill in the published-setting calibration when no generator is given.
  bool auto_calibrate = true;

  void validate() const;
  // True when utility, limits and elimination match the published table's setting.
  bool matches_paper_setting() const;
  // The published setting with the shipped table, which stops at 6 patients per dose.
  static Boin12Config paper();
};

// Pr(u > u_b) under Beta(a0 + x, b0 + n - x), x the quasi-event mass.
double desirability(int n, double quasi, const RdsGeneratorParams& params);
double desirability(int n, int n_tox, int n_eff, const Boin12Config& cfg);

RdsTable generate_rds_table(const Boin12Config& cfg, std::span<const int> n_values);
RdsTable generate_rds_table(const Boin12Config& cfg, const RdsGeneratorParams& params,
                            std::span<const int> n_values);

struct CalibrationGrid {
  double prior_mass_min = 0.5;
  double prior_mass_max = 8.0;
  double prior_mass_step = 0.25;
  double prior_mean_min = 0.05;
  double prior_mean_max = 0.95;
  double prior_mean_step = 0.05;
  double benchmark_min = 0.30;
  double benchmark_max = 0.90;
  double benchmark_step = 0.01;
};

struct CalibrationResult {
  RdsGeneratorParams params;
  int mismatches = 0;
  std::vector<RdsKey> mismatched_rows;
  int exact_matches = 0;     // grid points reproducing the reference
  int grid_points = 0;
  double margin = 0.0;       // smallest gap between adjacent desirability levels
};

// Full grid scan; returns the best point (zero mismatches, widest margin).
CalibrationResult scan_generator_grid(const Boin12Config& cfg, const RdsTable& reference,
                                      const CalibrationGrid& grid = {});
// Throws kCalibrationFailed with the best mismatch count and rows when no
// grid point reproduces the reference exactly.
RdsGeneratorParams calibrate_generator(const Boin12Config& cfg, const RdsTable& reference,
                                       const CalibrationGrid& grid = {});

enum class EliminationReason { kNone, kSafety, kSafetyBelow, kFutility };
std::string to_string(EliminationReason reason);

struct DoseState {
  int n = 0;
  int n_tox = 0;
  int n_eff = 0;
  bool eliminated = false;
  EliminationReason reason = EliminationReason::kNone;

  friend bool operator==(const DoseState&, const DoseState&) = default;
};

// Applies both elimination rules; flags are sticky. Safety elimination
// removes the dose and every higher dose, futility only the dose itself.
std::vector<DoseState> refresh_eliminations(std::span<const DoseState> state,
                                            const Boin12Config& cfg);

enum class Action { kAssign, kTerminate };

struct Rationale {
  std::optional<BoundaryZone> zone;  // empty before any patient at the current dose
  int current = 0;
  int current_n = 0;
  int current_tox = 0;
  std::vector<int> candidates;
  std::vector<std::optional<double>> scores;  // RDS or desirability, per dose
  std::vector<bool> eliminated;
  bool override_fired = false;
  bool fallback_used = false;
  std::string note;

  friend bool operator==(const Rationale&, const Rationale&) = default;
};

struct Decision {
  Action action = Action::kTerminate;
  int dose = -1;  // 0-based; -1 when terminating
  Rationale rationale;

  friend bool operator==(const Decision&, const Decision&) = default;
};

// Scores used for comparing doses: the table rank in table-driven mode,
// the desirability itself in generator mode.
double dose_score(const DoseState& dose, const Boin12Config& cfg, const RdsTable& table);

Decision decide(std::span<const DoseState> state, int current, const Boin12Config& cfg,
                const RdsTable& table);

std::optional<int> select_obd(std::span<const DoseState> state, const Boin12Config& cfg,
                              const RdsTable& table);

// Resolved configuration plus the table every decision consults.
class Boin12Engine {
 public:
  // Resolves generator parameters and builds the table; when the generator
  // cannot be resolved, falls back to the published table with a warning.
  static Boin12Engine create(Boin12Config cfg);

  const Boin12Config& config() const noexcept { return cfg_; }
  const RdsTable& table() const noexcept { return table_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  Decision decide(std::span<const DoseState> state, int current) const {
    return doseopt::decide(state, current, cfg_, table_);
  }
  std::optional<int> select_obd(std::span<const DoseState> state) const {
    return doseopt::select_obd(state, cfg_, table_);
  }

 private:
  Boin12Config cfg_;
  RdsTable table_;
  std::vector<std::string> warnings_;
};

}  // namespace doseopt
