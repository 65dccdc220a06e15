#pragma once

// JSON configuration format shared by the CLI, the HTTP service and the
// trial log header. Parsing is strict: unknown keys are rejected, and every
// error carries the dotted path of the offending field. Numbers may be given
// either as JSON numbers or as decimal strings.

#include <json.hpp>

#include "doseopt/boin12.hpp"
#include "doseopt/merit.hpp"
#include "doseopt/outcome_models.hpp"
#include "doseopt/simulator.hpp"

namespace doseopt {

using Json = nlohmann::json;

UtilityTable utility_from_json(const Json& j);
Json to_json(const UtilityTable& u);

Boin12Config boin12_from_json(const Json& j);
Json to_json(const Boin12Config& c);

MeritSpec merit_spec_from_json(const Json& j);
Json to_json(const MeritSpec& s);
MeritDesign merit_design_from_json(const Json& j);
Json to_json(const MeritDesign& d);

DoseScenario scenario_from_json(const Json& j);
Json to_json(const DoseScenario& s);

TwoStageConfig two_stage_from_json(const Json& j);
Json to_json(const TwoStageConfig& c);

SimConfig sim_config_from_json(const Json& j);
Json to_json(const SimConfig& c);

// Reads a whole file as JSON; kIo when unreadable, kValidation when malformed.
Json read_json_file(const std::string& path);

// Fixed-point decimal string used wherever exact reporting matters.
std::string decimal(double v, int places = 6);

}  // namespace doseopt
