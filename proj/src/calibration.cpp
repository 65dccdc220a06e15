#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "doseopt/boin12.hpp"
#include "doseopt/error.hpp"

namespace doseopt {

namespace {

std::vector<double> grid_axis(double lo, double hi, double step) {
  std::vector<double> out;
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) out.push_back(lo + i * step);
  return out;
}

// Smallest gap between distinct desirability levels of the scored rows.
double level_margin(const Boin12Config& cfg, const RdsGeneratorParams& params,
                    const RdsTable& table) {
  std::vector<double> values;
  for (const auto& [key, entry] : table.rows()) {
    if (entry.eliminated) continue;
    values.push_back(desirability(key.n, quasi_events(key.n, key.n_tox, key.n_eff, cfg.utility),
                                  params));
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  double margin = std::numeric_limits<double>::infinity();
  for (size_t i = 1; i < values.size(); ++i) margin = std::min(margin, values[i] - values[i - 1]);
  return margin;
}

}  // namespace

CalibrationResult scan_generator_grid(const Boin12Config& cfg, const RdsTable& reference,
                                      const CalibrationGrid& grid) {
  require(!reference.empty(), ErrorCode::kValidation, "reference table is empty", "reference");
  const std::vector<int> ns = reference.n_values();
  const auto masses = grid_axis(grid.prior_mass_min, grid.prior_mass_max, grid.prior_mass_step);
  const auto means = grid_axis(grid.prior_mean_min, grid.prior_mean_max, grid.prior_mean_step);
  const auto benchmarks = grid_axis(grid.benchmark_min, grid.benchmark_max, grid.benchmark_step);

  CalibrationResult best;
  best.mismatches = std::numeric_limits<int>::max();
  best.margin = -1.0;
  for (double mass : masses) {
    for (double mean : means) {
      for (double ub : benchmarks) {
        const RdsGeneratorParams params{mass * mean, mass * (1.0 - mean), ub};
        const RdsTable table = generate_rds_table(cfg, params, ns);
        auto rows = table_mismatches(table, reference);
        const int count = static_cast<int>(rows.size());
        ++best.grid_points;
        if (count == 0) ++best.exact_matches;
        if (count > best.mismatches) continue;
        const double margin = count == 0 ? level_margin(cfg, params, table) : 0.0;
        if (count < best.mismatches || margin > best.margin) {
          best.params = params;
          best.mismatches = count;
          best.mismatched_rows = std::move(rows);
          best.margin = margin;
        }
      }
    }
  }
  return best;
}

RdsGeneratorParams calibrate_generator(const Boin12Config& cfg, const RdsTable& reference,
                                       const CalibrationGrid& grid) {
  const CalibrationResult result = scan_generator_grid(cfg, reference, grid);
  if (result.mismatches == 0) return result.params;
  std::ostringstream msg;
  msg << "no generator parameters reproduce the reference table; best point (a0="
      << result.params.a0 << ", b0=" << result.params.b0 << ", u_b=" << result.params.u_b
      << ") leaves " << result.mismatches << " mismatching rows:";
  for (const RdsKey& key : result.mismatched_rows) {
    msg << " (" << key.n << "," << key.n_tox << "," << key.n_eff << ")";
  }
  throw Error(ErrorCode::kCalibrationFailed, msg.str(), "reference");
}

}  // namespace doseopt
