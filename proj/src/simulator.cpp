#include "doseopt/simulator.hpp"

#include <algorithm>
#include <numeric>
#include <thread>

#include "doseopt/error.hpp"
#include "doseopt/isotonic.hpp"
#include "doseopt/special.hpp"

namespace doseopt {

void TwoStageConfig::validate() const {
  require(phi_t > 0.0 && phi_t < 1.0, ErrorCode::kInvalidProbability, "phi_T must lie in (0, 1)",
          "stage1.phi_T");
  require(cohort_size >= 1, ErrorCode::kValidation, "cohort size must be at least 1",
          "stage1.cohort_size");
  require(stage1_max_total >= 0, ErrorCode::kValidation, "stage 1 size must be nonnegative",
          "stage1.max_total");
  require(elimination_cutoff > 0.5 && elimination_cutoff < 1.0, ErrorCode::kValidation,
          "elimination cutoff must lie in (0.5, 1)", "stage1.elimination_cutoff");
  require(carry >= 1, ErrorCode::kValidation, "at least one dose must be carried", "carry");
  resolved_boundaries();
  if (const auto* d = std::get_if<MeritDesign>(&stage2)) d->validate();
  if (const auto* s = std::get_if<MeritSpec>(&stage2)) s->validate();
}

BoinBoundaries TwoStageConfig::resolved_boundaries() const {
  return boundaries ? *boundaries : lambda_bounds(phi_t);
}

MeritDesign TwoStageConfig::resolved_design() const {
  if (const auto* d = std::get_if<MeritDesign>(&stage2)) return *d;
  return search(std::get<MeritSpec>(stage2)).design;
}

void SimConfig::validate() const {
  scenario.validate();
  require(n_sim >= 1, ErrorCode::kValidation, "n_sim must be at least 1", "n_sim");
  require(start_dose >= 0 && start_dose < scenario.size(), ErrorCode::kValidation,
          "starting dose outside the dose grid", "start_dose");
  require(threads >= 0, ErrorCode::kValidation, "threads must be nonnegative", "threads");
  if (const auto* b = std::get_if<Boin12Config>(&design)) b->validate();
  if (const auto* t = std::get_if<TwoStageConfig>(&design)) t->validate();
}

int true_best_dose(const DoseScenario& s, const UtilityTable& u, double phi_t, double phi_e) {
  int best = -1;
  double best_u = 0.0;
  for (int j = 0; j < s.size(); ++j) {
    if (s.pi_t(j) > phi_t || s.pi_e(j) < phi_e) continue;
    const double value = utility_brt(s.pmf(j), u);
    if (best < 0 || value > best_u) {
      best = j;
      best_u = value;
    }
  }
  return best;
}

namespace {

// Per-replication summary; aggregation happens in replication order so the
// result does not depend on how replications were spread over threads.
struct Replication {
  int selected = -1;
  std::vector<int> patients;
  bool early = false;
  long eliminated_allocations = 0;
  std::vector<int> carried;     // two-stage arms
  std::vector<bool> admissible;
};

template <typename Run>
std::vector<Replication> run_all(const SimConfig& cfg, Run run) {
  std::vector<Replication> reps(cfg.n_sim);
  int workers = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, cfg.n_sim);
  auto body = [&](int worker) {
    for (int r = worker; r < cfg.n_sim; r += workers) {
      Rng rng(cfg.seed, static_cast<std::uint64_t>(r));
      reps[r] = run(rng);
    }
  };
  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(body, w);
  }
  return reps;
}

OperatingCharacteristics aggregate(const std::vector<Replication>& reps, int num_doses,
                                   int best_dose, std::optional<int> max_total) {
  OperatingCharacteristics oc;
  oc.n_sim = static_cast<int>(reps.size());
  oc.best_dose = best_dose;
  oc.selection_pct.assign(num_doses, 0.0);
  oc.avg_patients.assign(num_doses, 0.0);
  oc.carried.assign(num_doses, 0);
  std::vector<long> admissible(num_doses, 0);
  long none = 0, early = 0, total = 0, at_best = 0;
  std::vector<long> selected(num_doses, 0), patients(num_doses, 0);
  for (const Replication& r : reps) {
    if (r.selected >= 0) {
      ++selected[r.selected];
    } else {
      ++none;
    }
    early += r.early;
    const int sum = std::accumulate(r.patients.begin(), r.patients.end(), 0);
    total += sum;
    for (int j = 0; j < num_doses; ++j) patients[j] += r.patients[j];
    if (best_dose >= 0) at_best += r.patients[best_dose];
    if (max_total && sum > *max_total) ++oc.conservation_failures;
    if (static_cast<int>(r.patients.size()) != num_doses) ++oc.conservation_failures;
    oc.eliminated_allocations += r.eliminated_allocations;
    for (size_t k = 0; k < r.carried.size(); ++k) {
      ++oc.carried[r.carried[k]];
      admissible[r.carried[k]] += r.admissible[k];
    }
  }
  const double n = static_cast<double>(reps.size());
  for (int j = 0; j < num_doses; ++j) {
    oc.selection_pct[j] = 100.0 * selected[j] / n;
    oc.avg_patients[j] = patients[j] / n;
  }
  oc.none_pct = 100.0 * none / n;
  oc.avg_total = total / n;
  oc.early_stop_pct = 100.0 * early / n;
  oc.avg_at_best = at_best / n;
  oc.admissible_rate.assign(num_doses, 0.0);
  for (int j = 0; j < num_doses; ++j) {
    if (oc.carried[j] > 0) oc.admissible_rate[j] = static_cast<double>(admissible[j]) / oc.carried[j];
  }
  return oc;
}

}  // namespace

OperatingCharacteristics simulate_boin12(const SimConfig& cfg) {
  cfg.validate();
  const auto& design = std::get<Boin12Config>(cfg.design);
  const Boin12Engine engine = Boin12Engine::create(design);
  const Boin12Config& ec = engine.config();
  const DoseScenario& sc = cfg.scenario;
  const int J = sc.size();
  std::vector<OutcomeProbVector> pmfs;
  for (int j = 0; j < J; ++j) pmfs.push_back(sc.pmf(j));

  auto run = [&](Rng& rng) {
    Replication rep;
    std::vector<DoseState> state(J);
    int current = cfg.start_dose;
    int total = 0;
    for (;;) {
      state = refresh_eliminations(state, ec);
      const Decision d = engine.decide(state, current);
      if (d.action == Action::kTerminate) break;
      if (state[d.dose].eliminated) ++rep.eliminated_allocations;
      DoseState& dose = state[d.dose];
      const int size = std::min({ec.cohort_size, ec.max_total - total, ec.max_per_dose - dose.n});
      for (int i = 0; i < size; ++i) {
        const Outcome o = sample_outcome(rng, pmfs[d.dose]);
        dose.n_tox += o.tox;
        dose.n_eff += o.eff;
      }
      dose.n += size;
      total += size;
      current = d.dose;
    }
    rep.patients.resize(J);
    for (int j = 0; j < J; ++j) rep.patients[j] = state[j].n;
    rep.early = total < ec.max_total;
    rep.selected = engine.select_obd(state).value_or(-1);
    return rep;
  };
  const int best = true_best_dose(sc, ec.utility, ec.phi_t, ec.phi_e);
  return aggregate(run_all(cfg, run), J, best, ec.max_total);
}

namespace {

// Isotonic posterior toxicity means over the tried doses below any
// eliminated one; the dose closest to the target wins, ties to the lower.
int select_mtd(const std::vector<int>& n, const std::vector<int>& tox, int usable, double phi) {
  std::vector<int> doses;
  std::vector<double> means, weights;
  for (int j = 0; j < usable; ++j) {
    if (n[j] == 0) continue;
    doses.push_back(j);
    means.push_back((tox[j] + 0.05) / (n[j] + 0.1));
    weights.push_back(n[j]);
  }
  if (doses.empty()) return -1;
  const std::vector<double> fit = isotonic_fit(means, weights);
  int best = 0;
  for (size_t k = 1; k < fit.size(); ++k) {
    if (std::abs(fit[k] - phi) < std::abs(fit[best] - phi)) best = static_cast<int>(k);
  }
  return doses[best];
}

}  // namespace

OperatingCharacteristics simulate_two_stage(const SimConfig& cfg) {
  cfg.validate();
  const auto& ts = std::get<TwoStageConfig>(cfg.design);
  const BoinBoundaries b = ts.resolved_boundaries();
  const MeritDesign merit = ts.resolved_design();
  const DoseScenario& sc = cfg.scenario;
  const int J = sc.size();
  const int stage1_total = ts.stage1_max_total > 0 ? ts.stage1_max_total : 6 * J;
  std::vector<OutcomeProbVector> pmfs;
  for (int j = 0; j < J; ++j) pmfs.push_back(sc.pmf(j));

  auto run = [&](Rng& rng) {
    Replication rep;
    rep.patients.assign(J, 0);
    std::vector<int> tox(J, 0);
    int usable = J;  // doses at or above this index are eliminated
    int current = cfg.start_dose;
    int total = 0;
    while (total < stage1_total) {
      if (current >= usable) ++rep.eliminated_allocations;
      const int size = std::min(ts.cohort_size, stage1_total - total);
      for (int i = 0; i < size; ++i) tox[current] += sample_outcome(rng, pmfs[current]).tox;
      rep.patients[current] += size;
      total += size;
      const int n = rep.patients[current];
      if (n >= 3 && beta_tail(1.0 + tox[current], 1.0 + n - tox[current], ts.phi_t) >
                        ts.elimination_cutoff) {
        usable = current;
        if (usable == 0) break;
        current = usable - 1;
        continue;
      }
      switch (classify(n, tox[current], b)) {
        case BoundaryZone::kEscalate:
          if (current + 1 < usable) ++current;
          break;
        case BoundaryZone::kDeescalate:
          if (current > 0) --current;
          break;
        case BoundaryZone::kStay:
          break;
      }
    }
    const int mtd = select_mtd(rep.patients, tox, usable, ts.phi_t);
    if (mtd < 0) {
      rep.early = true;
      return rep;
    }
    int best = -1;
    double best_u = 0.0;
    for (int arm = mtd; arm >= 0 && arm > mtd - ts.carry; --arm) {
      Matrix2 counts = Matrix2::Zero();
      for (int i = 0; i < merit.n; ++i) {
        const Outcome o = sample_outcome(rng, pmfs[arm]);
        counts(o.tox, o.eff) += 1.0;
      }
      rep.patients[arm] += merit.n;
      const int x_t = static_cast<int>(counts.row(1).sum());
      const int x_e = static_cast<int>(counts.col(1).sum());
      const bool ok = admissible(x_e, x_t, merit);
      rep.carried.push_back(arm);
      rep.admissible.push_back(ok);
      if (!ok) continue;
      const double mean_u = counts.cwiseProduct(ts.utility.scores()).sum() / merit.n;
      // Arms are visited from high to low, so >= hands ties to the lower dose.
      if (best < 0 || mean_u >= best_u) {
        best = arm;
        best_u = mean_u;
      }
    }
    rep.selected = best;
    return rep;
  };
  const int best = true_best_dose(sc, ts.utility, ts.phi_t, EliminationConfig{}.phi_e_limit);
  return aggregate(run_all(cfg, run), J, best, std::nullopt);
}

OperatingCharacteristics simulate(const SimConfig& cfg) {
  return std::holds_alternative<Boin12Config>(cfg.design) ? simulate_boin12(cfg)
                                                          : simulate_two_stage(cfg);
}

SampleSizeRange advise_sample_size(int J, Strategy strategy, int arms) {
  require(J >= 1, ErrorCode::kValidation, "J must be at least 1", "J");
  if (strategy == Strategy::kEfficacyIntegrated) return {6 * J, 9 * J};
  require(arms >= 1 && arms <= J, ErrorCode::kValidation, "arms must lie in [1, J]", "arms");
  return {6 * J + 20 * arms, 6 * J + 40 * arms};
}

}  // namespace doseopt
