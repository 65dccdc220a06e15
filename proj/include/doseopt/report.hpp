#pragma once

// Operating-characteristics reports. Both formats carry the full simulation
// configuration so a report can be regenerated from itself.

#include <string>

#include "doseopt/config.hpp"
#include "doseopt/simulator.hpp"

namespace doseopt {

std::string oc_csv(const OperatingCharacteristics& oc, const SimConfig& cfg);
Json oc_json(const OperatingCharacteristics& oc, const SimConfig& cfg);

}  // namespace doseopt
