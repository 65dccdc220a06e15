#include "doseopt/boin12.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doseopt/error.hpp"
#include "doseopt/special.hpp"

namespace doseopt {

void RdsGeneratorParams::validate() const {
  require(std::isfinite(a0) && a0 > 0.0, ErrorCode::kValidation, "a0 must be > 0", "generator.a0");
  require(std::isfinite(b0) && b0 > 0.0, ErrorCode::kValidation, "b0 must be > 0", "generator.b0");
  require(u_b > 0.0 && u_b < 1.0, ErrorCode::kValidation, "u_b must lie in (0, 1)",
          "generator.u_b");
}

RdsGeneratorParams RdsGeneratorParams::paper_calibrated() { return {1.95, 1.05, 0.64}; }

void Boin12Config::validate() const {
  require(phi_t > 0.0 && phi_t < 1.0, ErrorCode::kInvalidProbability, "phi_T must lie in (0, 1)",
          "phi_T");
  require(phi_e > 0.0 && phi_e < 1.0, ErrorCode::kInvalidProbability, "phi_E must lie in (0, 1)",
          "phi_E");
  require(std::abs(boundaries.phi - phi_t) < 1e-12, ErrorCode::kValidation,
          "boundaries must target phi_T", "boundaries");
  require(boundaries.lambda_e > 0.0 && boundaries.lambda_e < boundaries.phi &&
              boundaries.phi < boundaries.lambda_d && boundaries.lambda_d < 1.0,
          ErrorCode::kValidation, "need 0 < lambda_e < phi < lambda_d < 1", "boundaries");
  require(cohort_size >= 1, ErrorCode::kValidation, "cohort size must be at least 1",
          "cohort_size");
  require(n_star >= cohort_size, ErrorCode::kValidation, "N* must be at least the cohort size",
          "n_star");
  require(max_per_dose >= cohort_size, ErrorCode::kValidation,
          "max_per_dose must be at least the cohort size", "max_per_dose");
  require(max_per_dose <= max_total, ErrorCode::kValidation,
          "max_per_dose cannot exceed max_total", "max_per_dose");
  elimination.validate();
  if (generator) generator->validate();
}

bool Boin12Config::matches_paper_setting() const {
  const EliminationConfig ref{};
  return utility == UtilityTable::paper_default() && elimination.phi_t_limit == ref.phi_t_limit &&
         elimination.phi_e_limit == ref.phi_e_limit && elimination.cutoff == ref.cutoff &&
         elimination.min_n == ref.min_n;
}

Boin12Config Boin12Config::paper() {
  Boin12Config cfg;
  cfg.table_source = TableSource::kPaper;
  cfg.generator = RdsGeneratorParams::paper_calibrated();
  return cfg;
}

double desirability(int n, double quasi, const RdsGeneratorParams& params) {
  require(n >= 0 && quasi >= 0.0 && quasi <= n, ErrorCode::kValidation,
          "quasi-events must lie in [0, n]", "x");
  return beta_tail(params.a0 + quasi, params.b0 + n - quasi, params.u_b);
}

double desirability(int n, int n_tox, int n_eff, const Boin12Config& cfg) {
  require(cfg.generator.has_value(), ErrorCode::kUncalibrated,
          "desirability generator is not calibrated; run calibrate or supply generator "
          "parameters",
          "generator");
  return desirability(n, quasi_events(n, n_tox, n_eff, cfg.utility), *cfg.generator);
}

RdsTable generate_rds_table(const Boin12Config& cfg, const RdsGeneratorParams& params,
                            std::span<const int> n_values) {
  require(!n_values.empty(), ErrorCode::kValidation, "n_values must be nonempty", "n_values");
  require(std::find(n_values.begin(), n_values.end(), 0) != n_values.end(),
          ErrorCode::kValidation, "n_values must include 0", "n_values");
  params.validate();

  std::vector<int> ns(n_values.begin(), n_values.end());
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

  RdsTable table;
  std::vector<RdsKey> scored;
  std::vector<double> values;
  for (int n : ns) {
    require(n >= 0, ErrorCode::kValidation, "patient counts must be nonnegative", "n_values");
    for (int t = 0; t <= n; ++t) {
      for (int e = 0; e <= n; ++e) {
        if (eliminate_safety(n, t, cfg.elimination) || eliminate_futility(n, e, cfg.elimination)) {
          table.set({n, t, e}, RdsEntry::elim());
          continue;
        }
        scored.push_back({n, t, e});
        values.push_back(desirability(n, quasi_events(n, t, e, cfg.utility), params));
      }
    }
  }
  const std::vector<int> ranks = competition_ranks(values);
  for (size_t i = 0; i < scored.size(); ++i) table.set(scored[i], RdsEntry::scored(ranks[i]));
  return table;
}

RdsTable generate_rds_table(const Boin12Config& cfg, std::span<const int> n_values) {
  require(cfg.generator.has_value(), ErrorCode::kUncalibrated,
          "desirability generator is not calibrated; run calibrate or supply generator "
          "parameters",
          "generator");
  return generate_rds_table(cfg, *cfg.generator, n_values);
}

std::string to_string(EliminationReason reason) {
  switch (reason) {
    case EliminationReason::kNone: return "none";
    case EliminationReason::kSafety: return "safety";
    case EliminationReason::kSafetyBelow: return "safety_lower_dose";
    case EliminationReason::kFutility: return "futility";
  }
  return "unknown";
}

std::vector<DoseState> refresh_eliminations(std::span<const DoseState> state,
                                            const Boin12Config& cfg) {
  std::vector<DoseState> out(state.begin(), state.end());
  for (size_t j = 0; j < out.size(); ++j) {
    DoseState& d = out[j];
    require(d.n >= 0 && d.n_tox >= 0 && d.n_tox <= d.n && d.n_eff >= 0 && d.n_eff <= d.n,
            ErrorCode::kValidation, "dose " + std::to_string(j + 1) + " has inconsistent counts",
            "state");
    if (eliminate_safety(d.n, d.n_tox, cfg.elimination)) {
      if (!d.eliminated || d.reason == EliminationReason::kFutility) {
        d.eliminated = true;
        d.reason = EliminationReason::kSafety;
      }
      for (size_t k = j + 1; k < out.size(); ++k) {
        if (!out[k].eliminated) {
          out[k].eliminated = true;
          out[k].reason = EliminationReason::kSafetyBelow;
        }
      }
    } else if (!d.eliminated && eliminate_futility(d.n, d.n_eff, cfg.elimination)) {
      d.eliminated = true;
      d.reason = EliminationReason::kFutility;
    }
  }
  return out;
}

double dose_score(const DoseState& dose, const Boin12Config& cfg, const RdsTable& table) {
  if (cfg.mode == EngineMode::kGenerator) {
    return desirability(dose.n, dose.n_tox, dose.n_eff, cfg);
  }
  auto entry = table.find(dose.n, dose.n_tox, dose.n_eff);
  require(entry.has_value(), ErrorCode::kNotTabulated,
          "configuration (" + std::to_string(dose.n) + "," + std::to_string(dose.n_tox) + "," +
              std::to_string(dose.n_eff) +
              ") is not in the decision table; generate a table covering every patient count",
          "table");
  return entry->eliminated ? -1.0 : static_cast<double>(entry->rds);
}

namespace {

Decision terminate(Rationale rationale, std::string note) {
  rationale.note = std::move(note);
  return {Action::kTerminate, -1, std::move(rationale)};
}

Decision assign(int dose, Rationale rationale) {
  return {Action::kAssign, dose, std::move(rationale)};
}

}  // namespace

Decision decide(std::span<const DoseState> input, int current, const Boin12Config& cfg,
                const RdsTable& table) {
  const int num_doses = static_cast<int>(input.size());
  require(num_doses >= 1, ErrorCode::kValidation, "at least one dose is required", "state");
  require(current >= 0 && current < num_doses, ErrorCode::kValidation,
          "current dose out of range", "current");
  const std::vector<DoseState> state = refresh_eliminations(input, cfg);

  Rationale why;
  why.current = current;
  why.current_n = state[current].n;
  why.current_tox = state[current].n_tox;
  why.scores.resize(num_doses);
  why.eliminated.resize(num_doses);
  for (int j = 0; j < num_doses; ++j) {
    why.eliminated[j] = state[j].eliminated;
    if (!state[j].eliminated) why.scores[j] = dose_score(state[j], cfg, table);
  }
  auto score = [&](int j) { return *why.scores[j]; };
  auto open = [&](int j) { return !state[j].eliminated && state[j].n < cfg.max_per_dose; };

  if (std::all_of(state.begin(), state.end(), [](const DoseState& d) { return d.eliminated; })) {
    return terminate(std::move(why), "all doses eliminated");
  }
  const int total = std::accumulate(state.begin(), state.end(), 0,
                                    [](int acc, const DoseState& d) { return acc + d.n; });
  if (total >= cfg.max_total) return terminate(std::move(why), "maximum sample size reached");

  auto fallback = [&](bool may_escalate) {
    why.fallback_used = true;
    for (int j = 0; j < num_doses; ++j) {
      if (!open(j)) continue;
      if (j <= current || (may_escalate && j == current + 1)) return assign(j, std::move(why));
      break;
    }
    return terminate(std::move(why), "no admissible dose within reach");
  };

  if (state[current].n == 0) {
    if (open(current)) return assign(current, std::move(why));
    return fallback(false);
  }

  const BoundaryZone zone = classify(state[current].n, state[current].n_tox, cfg.boundaries);
  why.zone = zone;
  const int hi = zone == BoundaryZone::kEscalate ? current + 1
                 : zone == BoundaryZone::kStay   ? current
                                                 : current - 1;
  for (int j = current - 1; j <= hi; ++j) {
    if (j >= 0 && j < num_doses && !state[j].eliminated) why.candidates.push_back(j);
  }

  if (cfg.exploration_override && zone == BoundaryZone::kEscalate &&
      state[current].n >= cfg.n_star && current + 1 < num_doses && state[current + 1].n == 0 &&
      open(current + 1)) {
    why.override_fired = true;
    return assign(current + 1, std::move(why));
  }

  int best = -1;
  for (int j : why.candidates) {
    if (!open(j)) continue;
    if (best < 0 || score(j) > score(best) ||
        (score(j) == score(best) && j == current && best != current)) {
      best = j;
    }
  }
  if (best >= 0) return assign(best, std::move(why));
  if (!why.candidates.empty()) {
    return terminate(std::move(why), "every candidate dose reached max_per_dose");
  }
  return fallback(zone == BoundaryZone::kEscalate);
}

std::optional<int> select_obd(std::span<const DoseState> input, const Boin12Config& cfg,
                              const RdsTable& table) {
  const std::vector<DoseState> state = refresh_eliminations(input, cfg);
  std::optional<int> best;
  double best_score = 0.0;
  for (int j = 0; j < static_cast<int>(state.size()); ++j) {
    if (state[j].eliminated || state[j].n < 1) continue;
    const double s = dose_score(state[j], cfg, table);
    if (!best || s > best_score) {
      best = j;
      best_score = s;
    }
  }
  return best;
}

Boin12Engine Boin12Engine::create(Boin12Config cfg) {
  cfg.validate();
  Boin12Engine engine;
  if (!cfg.generator && cfg.auto_calibrate && cfg.matches_paper_setting()) {
    cfg.generator = RdsGeneratorParams::paper_calibrated();
  }
  if (!cfg.generator && cfg.mode == EngineMode::kGenerator) {
    require(cfg.matches_paper_setting(), ErrorCode::kUncalibrated,
            "generator mode needs calibrated generator parameters", "generator");
    engine.warnings_.push_back(
        "desirability generator is not calibrated; running table-driven with the published table");
    cfg.mode = EngineMode::kTableDriven;
    cfg.table_source = TableSource::kPaper;
  }
  if (cfg.mode == EngineMode::kTableDriven) {
    if (cfg.table_source == TableSource::kPaper) {
      require(cfg.matches_paper_setting(), ErrorCode::kValidation,
              "the published table only applies to the default utility and elimination limits",
              "table_source");
      if (cfg.max_per_dose > 6) {
        engine.warnings_.push_back(
            "published table covers at most 6 patients per dose; later lookups will fail with "
            "not_tabulated");
      }
      engine.table_ = RdsTable::paper_fixture();
    } else {
      require(cfg.generator.has_value(), ErrorCode::kUncalibrated,
              "generated tables need generator parameters; run calibrate", "generator");
      std::vector<int> ns(cfg.max_per_dose + 1);
      std::iota(ns.begin(), ns.end(), 0);
      engine.table_ = generate_rds_table(cfg, ns);
    }
  }
  engine.cfg_ = std::move(cfg);
  return engine;
}

}  // namespace doseopt
