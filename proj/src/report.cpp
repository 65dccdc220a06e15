#include "doseopt/report.hpp"

#include <sstream>

namespace doseopt {

std::string oc_csv(const OperatingCharacteristics& oc, const SimConfig& cfg) {
  std::ostringstream out;
  out << "# config: " << to_json(cfg).dump() << '\n';
  out << "dose,selection_pct,avg_patients,carried,admissible_rate\n";
  for (size_t j = 0; j < oc.selection_pct.size(); ++j) {
    out << j + 1 << ',' << decimal(oc.selection_pct[j], 4) << ',' << decimal(oc.avg_patients[j], 4)
        << ',' << oc.carried[j] << ',' << decimal(oc.admissible_rate[j], 4) << '\n';
  }
  out << "metric,value\n"
      << "none_pct," << decimal(oc.none_pct, 4) << '\n'
      << "avg_total," << decimal(oc.avg_total, 4) << '\n'
      << "early_stop_pct," << decimal(oc.early_stop_pct, 4) << '\n'
      << "best_dose," << (oc.best_dose >= 0 ? std::to_string(oc.best_dose + 1) : "none") << '\n'
      << "avg_at_best," << decimal(oc.avg_at_best, 4) << '\n'
      << "eliminated_allocations," << oc.eliminated_allocations << '\n'
      << "conservation_failures," << oc.conservation_failures << '\n'
      << "n_sim," << oc.n_sim << '\n';
  return out.str();
}

Json oc_json(const OperatingCharacteristics& oc, const SimConfig& cfg) {
  Json doses = Json::array();
  for (size_t j = 0; j < oc.selection_pct.size(); ++j) {
    doses.push_back({{"dose", j + 1},
                     {"selection_pct", decimal(oc.selection_pct[j], 4)},
                     {"avg_patients", decimal(oc.avg_patients[j], 4)},
                     {"carried", oc.carried[j]},
                     {"admissible_rate", decimal(oc.admissible_rate[j], 6)}});
  }
  return {{"config", to_json(cfg)},
          {"doses", doses},
          {"none_pct", decimal(oc.none_pct, 4)},
          {"avg_total", decimal(oc.avg_total, 4)},
          {"early_stop_pct", decimal(oc.early_stop_pct, 4)},
          {"best_dose", oc.best_dose >= 0 ? Json(oc.best_dose + 1) : Json(nullptr)},
          {"avg_at_best", decimal(oc.avg_at_best, 4)},
          {"eliminated_allocations", oc.eliminated_allocations},
          {"conservation_failures", oc.conservation_failures},
          {"n_sim", oc.n_sim}};
}

}  // namespace doseopt
