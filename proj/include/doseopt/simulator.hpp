#pragma once

// Monte Carlo operating characteristics for the utility-based interval
// design and for the two-stage (toxicity escalation, then randomization) flow.

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "doseopt/boin12.hpp"
#include "doseopt/merit.hpp"
#include "doseopt/outcome_models.hpp"

namespace doseopt {

struct TwoStageConfig {
  // Stage 1: toxicity-only interval escalation targeting phi_t.
  double phi_t = 0.3;
  std::optional<BoinBoundaries> boundaries;  // default lambda_bounds(phi_t)
  int cohort_size = 3;
  int stage1_max_total = 0;     // 0 means 6 per dose
  double elimination_cutoff = 0.95;
  // Number of doses randomized: the MTD and the next lower ones.
  int carry = 2;
  // Stage 2: a fixed design, or a spec solved before simulating.
  std::variant<MeritDesign, MeritSpec> stage2 = MeritDesign{24, 7, 5};
  // Admissible dose with the highest observed mean utility wins.
  UtilityTable utility = UtilityTable::paper_default();

  void validate() const;
  BoinBoundaries resolved_boundaries() const;
  MeritDesign resolved_design() const;
};

struct SimConfig {
  DoseScenario scenario;
  std::variant<Boin12Config, TwoStageConfig> design;
  int n_sim = 1000;
  std::uint64_t seed = 20240101;
  int start_dose = 0;  // 0-based
  int threads = 0;     // 0 = hardware concurrency

  void validate() const;
};

struct OperatingCharacteristics {
  std::vector<double> selection_pct;      // per dose
  double none_pct = 0.0;
  std::vector<double> avg_patients;       // per dose
  double avg_total = 0.0;
  double early_stop_pct = 0.0;
  int best_dose = -1;                     // true-best dose, -1 if none qualifies
  double avg_at_best = 0.0;
  // Two-stage only: replications carrying each dose and the fraction of
  // those in which the carried arm was admissible.
  std::vector<int> carried;
  std::vector<double> admissible_rate;
  // Audit counters; both must be zero.
  long eliminated_allocations = 0;
  long conservation_failures = 0;
  int n_sim = 0;
};

// Dose with the highest true mean utility among doses within both limits.
int true_best_dose(const DoseScenario& s, const UtilityTable& u, double phi_t, double phi_e);

OperatingCharacteristics simulate_boin12(const SimConfig& cfg);
OperatingCharacteristics simulate_two_stage(const SimConfig& cfg);
OperatingCharacteristics simulate(const SimConfig& cfg);

enum class Strategy { kEfficacyIntegrated, kTwoStage };

struct SampleSizeRange {
  int low = 0;
  int high = 0;
  friend bool operator==(const SampleSizeRange&, const SampleSizeRange&) = default;
};

// Rules of thumb: 6J to 9J for the integrated design; 6J escalation plus
// 20 to 40 per randomized arm for the two-stage design.
SampleSizeRange advise_sample_size(int J, Strategy strategy, int arms = 2);

}  // namespace doseopt
