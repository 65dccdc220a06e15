#include "doseopt/api.hpp"

#include <cstdio>

#include "doseopt/error.hpp"
#include "doseopt/report.hpp"

namespace doseopt {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kWrongStatus: return 409;
    case ErrorCode::kUnauthorized: return 401;
    case ErrorCode::kCorruptLog:
    case ErrorCode::kIo: return 500;
    default: return 422;
  }
}

ApiError to_api_error(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return {std::string(to_string(err->code())), err->what(), err->field(),
            http_status(err->code())};
  }
  if (dynamic_cast<const Json::parse_error*>(&e)) {
    return {"validation_error", std::string("malformed JSON: ") + e.what(), "body", 400};
  }
  if (dynamic_cast<const Json::exception*>(&e)) {
    return {"validation_error", e.what(), "body", 422};
  }
  return {"internal_error", e.what(), "", 500};
}

Json to_json(const ApiError& e) {
  return {{"error", {{"code", e.code}, {"message", e.message}, {"field", e.field}}}};
}

Json api_boundaries(double target, std::optional<double> phi1, std::optional<double> phi2) {
  check_probability(target, "target");
  const BoinBoundaries b = lambda_bounds(target, phi1.value_or(0.6 * target),
                                         phi2.value_or(1.4 * target));
  return {{"phi", decimal(b.phi)},
          {"phi1", decimal(b.phi1)},
          {"phi2", decimal(b.phi2)},
          {"lambda_e", decimal(b.lambda_e)},
          {"lambda_d", decimal(b.lambda_d)}};
}

std::string boundaries_line(const Json& b) {
  const double e = std::stod(b.at("lambda_e").get<std::string>());
  const double d = std::stod(b.at("lambda_d").get<std::string>());
  return decimal(e, 3) + " " + decimal(d, 3);
}

std::vector<int> default_n_values(const Boin12Config& cfg) {
  std::vector<int> ns;
  for (int n = 0; n <= cfg.n_star; n += cfg.cohort_size) ns.push_back(n);
  return ns;
}

namespace {

Boin12Config with_generator(Boin12Config cfg) {
  if (!cfg.generator && cfg.auto_calibrate && cfg.matches_paper_setting()) {
    cfg.generator = RdsGeneratorParams::paper_calibrated();
  }
  require(cfg.generator.has_value(), ErrorCode::kUncalibrated,
          "no generator parameters for this configuration; run calibrate and add them under "
          "'generator'",
          "generator");
  return cfg;
}

Json object_or_empty(const Json& j) { return j.is_null() ? Json::object() : j; }

}  // namespace

std::string api_rds_table_csv(const Json& config, const std::vector<int>& n_values) {
  const Boin12Config cfg = boin12_from_json(object_or_empty(config));
  if (cfg.table_source == TableSource::kPaper) {
    require(n_values.empty(), ErrorCode::kValidation,
            "the published table has fixed patient counts", "n_values");
    return std::string(RdsTable::paper_fixture_csv());
  }
  const std::vector<int> ns = n_values.empty() ? default_n_values(cfg) : n_values;
  return generate_rds_table(with_generator(cfg), ns).to_csv();
}

Json api_calibrate(const std::string& reference_csv, const Json& config) {
  const Boin12Config cfg = boin12_from_json(object_or_empty(config));
  const RdsTable reference = RdsTable::from_csv(reference_csv);
  const CalibrationResult r = scan_generator_grid(cfg, reference);
  Json rows = Json::array();
  for (const RdsKey& k : r.mismatched_rows) rows.push_back({k.n, k.n_tox, k.n_eff});
  Json out{{"a0", decimal(r.params.a0, 4)},
           {"b0", decimal(r.params.b0, 4)},
           {"u_b", decimal(r.params.u_b, 4)},
           {"mismatches", r.mismatches},
           {"mismatched_rows", rows},
           {"exact_matches", r.exact_matches},
           {"grid_points", r.grid_points},
           {"margin", decimal(r.margin)}};
  if (r.mismatches > 0) calibrate_generator(cfg, reference);  // throws the mismatch report
  return out;
}

namespace {

Json merit_result_json(const MeritResult& r, const MeritSpec& s) {
  return {{"n", r.design.n},
          {"m_T", r.design.m_t},
          {"m_E", r.design.m_e},
          {"t1e", decimal(r.t1e)},
          {"power", decimal(r.power)},
          {"t1e_variant", to_string(s.t1e_variant)},
          {"power_variant", to_string(s.power_variant)}};
}

}  // namespace

Json api_merit_search(const Json& spec) {
  const MeritSpec s = merit_spec_from_json(object_or_empty(spec));
  return merit_result_json(search(s), s);
}

Json api_merit_variants() {
  const std::vector<VariantFit> fits = fit_merit_variants();
  Json out = Json::array();
  for (const VariantFit& f : fits) {
    out.push_back({{"t1e_variant", to_string(f.t1e)},
                   {"power_variant", to_string(f.power)},
                   {"exact_cells", f.exact_matches()},
                   {"n_cells", f.n_matches()},
                   {"cells", f.cells.size()}});
  }
  return {{"variants", out},
          {"selected",
           {{"t1e_variant", to_string(fits.front().t1e)},
            {"power_variant", to_string(fits.front().power)}}}};
}

Json api_brt(const std::vector<double>& probs, const Json& utility) {
  require(probs.size() == 4, ErrorCode::kValidation,
          "expected four probabilities p00 p01 p10 p11", "probs");
  const UtilityTable u =
      utility.is_null() ? UtilityTable::paper_default() : utility_from_json(utility);
  const OutcomeProbVector p(probs[0], probs[1], probs[2], probs[3]);
  return {{"utility_brt", decimal(utility_brt(p, u))},
          {"pi_T", decimal(p.tox_margin())},
          {"pi_E", decimal(p.eff_margin())}};
}

Json api_advise(int J, const std::string& strategy, int arms) {
  if (strategy == "efficacy_integrated") {
    const SampleSizeRange r = advise_sample_size(J, Strategy::kEfficacyIntegrated);
    return {{"strategy", strategy}, {"J", J}, {"low", r.low}, {"high", r.high}};
  }
  require(strategy == "two_stage", ErrorCode::kValidation,
          "strategy must be efficacy_integrated or two_stage", "strategy");
  const SampleSizeRange r = advise_sample_size(J, Strategy::kTwoStage, arms);
  return {{"strategy", strategy},
          {"J", J},
          {"arms", arms},
          {"escalation", 6 * J},
          {"per_arm_low", 20},
          {"per_arm_high", 40},
          {"low", r.low},
          {"high", r.high}};
}

Json api_simulate(const Json& sim_config) {
  const SimConfig cfg = sim_config_from_json(sim_config);
  return oc_json(simulate(cfg), cfg);
}

std::string api_simulate_csv(const Json& sim_config) {
  const SimConfig cfg = sim_config_from_json(sim_config);
  return oc_csv(simulate(cfg), cfg);
}

namespace {

int int_field(const Json& body, const char* key, std::optional<int> fallback = std::nullopt) {
  if (!body.contains(key) || body.at(key).is_null()) {
    require(fallback.has_value(), ErrorCode::kValidation, "missing field", key);
    return *fallback;
  }
  const Json& v = body.at(key);
  require(v.is_number_integer(), ErrorCode::kValidation, "expected an integer", key);
  return v.get<int>();
}

std::string string_field(const Json& body, const char* key) {
  if (!body.contains(key) || body.at(key).is_null()) return {};
  require(body.at(key).is_string(), ErrorCode::kValidation, "expected a string", key);
  return body.at(key).get<std::string>();
}

bool bool_field(const Json& body, const char* key) {
  if (!body.contains(key) || body.at(key).is_null()) return false;
  require(body.at(key).is_boolean(), ErrorCode::kValidation, "expected true or false", key);
  return body.at(key).get<bool>();
}

void check_keys(const Json& body, std::initializer_list<const char*> keys) {
  require(body.is_object(), ErrorCode::kValidation, "expected a JSON object", "body");
  for (const auto& [key, value] : body.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    require(known, ErrorCode::kValidation, "unknown field '" + key + "'", key);
  }
}

}  // namespace

Json api_create_trial(TrialStore& store, const Json& body) {
  check_keys(body, {"id", "config", "num_doses", "start_dose"});
  std::string id = string_field(body, "id");
  require(!id.empty(), ErrorCode::kValidation, "missing field", "id");
  Boin12Config cfg;
  if (body.contains("config")) {
    try {
      cfg = boin12_from_json(object_or_empty(body.at("config")));
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), e.field().empty() ? "config" : "config." + e.field());
    }
  }
  const int num_doses = int_field(body, "num_doses");
  const int start = int_field(body, "start_dose", 1) - 1;
  return state_json(store.create_trial(id, cfg, num_doses, start));
}

Json api_record_cohort(TrialStore& store, const std::string& id, const Json& body) {
  check_keys(body, {"dose", "size", "n_tox", "n_eff", "timestamp", "note", "override", "event_key"});
  CohortEvent ev;
  ev.dose = int_field(body, "dose") - 1;
  ev.size = int_field(body, "size");
  ev.n_tox = int_field(body, "n_tox");
  ev.n_eff = int_field(body, "n_eff");
  ev.timestamp = string_field(body, "timestamp");
  ev.note = string_field(body, "note");
  ev.override_dose = bool_field(body, "override");
  ev.event_key = string_field(body, "event_key");
  const Decision d = store.record_cohort(id, ev);
  const TrialState s = store.get(id);
  return {{"decision", decision_json(d, ev.dose, s.config)}, {"trial", state_json(s)}};
}

Json api_close_trial(TrialStore& store, const std::string& id, const Json& body) {
  const Json b = object_or_empty(body);
  check_keys(b, {"force"});
  const FinalReport r = store.close_trial(id, bool_field(b, "force"));
  return {{"id", r.id},
          {"obd", r.obd ? Json(*r.obd + 1) : Json(nullptr)},
          {"interim", r.interim},
          {"audit", r.audit}};
}

Json api_get_trial(const TrialStore& store, const std::string& id) {
  return state_json(store.get(id));
}

Json api_audit(const TrialStore& store, const std::string& id) { return store.audit(id); }

}  // namespace doseopt
