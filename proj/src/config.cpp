#include "doseopt/config.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "doseopt/error.hpp"

namespace doseopt {

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  if (prefix.empty()) return key;
  return key.starts_with('[') ? prefix + key : prefix + "." + key;
}

// Runs fn and prefixes the field path of any engine error it raises.
template <typename Fn>
auto scoped(const std::string& prefix, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (prefix.empty()) throw;
    throw Error(e.code(), e.what(), e.field().empty() ? prefix : join(prefix, e.field()));
  }
}

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    require(j.is_object(), ErrorCode::kValidation, "expected a JSON object",
            path_.empty() ? "" : path_);
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& [key, value] : j_.items()) {
      bool known = false;
      for (const char* k : keys) known = known || key == k;
      require(known, ErrorCode::kValidation, "unknown field '" + key + "'", join(path_, key));
    }
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const Json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return join(path_, key); }

  double number(const char* key, double fallback) const {
    return has(key) ? as_number(j_.at(key), path(key)) : fallback;
  }
  int integer(const char* key, int fallback) const {
    if (!has(key)) return fallback;
    const double v = as_number(j_.at(key), path(key));
    require(v == static_cast<double>(static_cast<long long>(v)) && std::abs(v) < 2e9,
            ErrorCode::kValidation, "expected an integer", path(key));
    return static_cast<int>(v);
  }
  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    require(j_.at(key).is_boolean(), ErrorCode::kValidation, "expected true or false", path(key));
    return j_.at(key).get<bool>();
  }
  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    require(j_.at(key).is_string(), ErrorCode::kValidation, "expected a string", path(key));
    return j_.at(key).get<std::string>();
  }
  std::vector<double> numbers(const char* key) const {
    require(has(key), ErrorCode::kValidation, "missing field", path(key));
    const Json& a = j_.at(key);
    require(a.is_array(), ErrorCode::kValidation, "expected an array", path(key));
    std::vector<double> out;
    for (size_t i = 0; i < a.size(); ++i) {
      out.push_back(as_number(a[i], path(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  static double as_number(const Json& v, const std::string& field) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      size_t used = 0;
      double out = 0.0;
      try {
        out = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == s.size() && used > 0, ErrorCode::kValidation,
              "'" + s + "' is not a decimal number", field);
      return out;
    }
    throw Error(ErrorCode::kValidation, "expected a number", field);
  }

 private:
  const Json& j_;
  std::string path_;
};

}  // namespace

std::string decimal(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

UtilityTable utility_from_json(const Json& j) {
  // [[u00, u01], [u10, u11]]: rows are toxicity, columns efficacy.
  require(j.is_array() && j.size() == 2 && j[0].is_array() && j[0].size() == 2 &&
              j[1].is_array() && j[1].size() == 2,
          ErrorCode::kValidation, "utility must be a 2x2 array [[u00, u01], [u10, u11]]");
  auto cell = [&](int t, int e) {
    return Reader::as_number(j[t][e], "[" + std::to_string(t) + "][" + std::to_string(e) + "]");
  };
  return UtilityTable(cell(0, 0), cell(0, 1), cell(1, 0), cell(1, 1));
}

Json to_json(const UtilityTable& u) {
  return Json::array({Json::array({u(0, 0), u(0, 1)}), Json::array({u(1, 0), u(1, 1)})});
}

Boin12Config boin12_from_json(const Json& j) {
  const Reader r(j, "");
  r.allow({"phi_T", "phi_E", "phi1", "phi2", "utility", "n_star", "cohort_size", "max_per_dose",
           "max_total", "elimination", "generator", "mode", "table_source",
           "exploration_override", "auto_calibrate"});
  Boin12Config c;
  c.phi_t = r.number("phi_T", c.phi_t);
  c.phi_e = r.number("phi_E", c.phi_e);
  check_probability(c.phi_t, "phi_T");
  check_probability(c.phi_e, "phi_E");
  c.elimination.phi_t_limit = c.phi_t;
  c.elimination.phi_e_limit = c.phi_e;
  c.boundaries = scoped("phi1", [&] {
    return lambda_bounds(c.phi_t, r.number("phi1", 0.6 * c.phi_t), r.number("phi2", 1.4 * c.phi_t));
  });
  if (r.has("utility")) c.utility = scoped("utility", [&] { return utility_from_json(r.at("utility")); });
  c.n_star = r.integer("n_star", c.n_star);
  c.cohort_size = r.integer("cohort_size", c.cohort_size);
  c.max_per_dose = r.integer("max_per_dose", c.max_per_dose);
  c.max_total = r.integer("max_total", c.max_total);
  if (r.has("elimination")) {
    const Reader e(r.at("elimination"), "elimination");
    e.allow({"phi_T_limit", "phi_E_limit", "cutoff", "min_n"});
    c.elimination.phi_t_limit = e.number("phi_T_limit", c.elimination.phi_t_limit);
    c.elimination.phi_e_limit = e.number("phi_E_limit", c.elimination.phi_e_limit);
    c.elimination.cutoff = e.number("cutoff", c.elimination.cutoff);
    c.elimination.min_n = e.integer("min_n", c.elimination.min_n);
  }
  if (r.has("generator")) {
    const Reader g(r.at("generator"), "generator");
    g.allow({"a0", "b0", "u_b"});
    RdsGeneratorParams p;
    p.a0 = g.number("a0", p.a0);
    p.b0 = g.number("b0", p.b0);
    p.u_b = g.number("u_b", p.u_b);
    c.generator = p;
  }
  const std::string mode = r.string("mode", "table");
  require(mode == "table" || mode == "generator", ErrorCode::kValidation,
          "mode must be 'table' or 'generator'", "mode");
  c.mode = mode == "table" ? EngineMode::kTableDriven : EngineMode::kGenerator;
  const std::string source = r.string("table_source", "generated");
  require(source == "generated" || source == "paper", ErrorCode::kValidation,
          "table_source must be 'generated' or 'paper'", "table_source");
  c.table_source = source == "paper" ? TableSource::kPaper : TableSource::kGenerated;
  c.exploration_override = r.boolean("exploration_override", c.exploration_override);
  c.auto_calibrate = r.boolean("auto_calibrate", c.auto_calibrate);
  c.validate();
  return c;
}

Json to_json(const Boin12Config& c) {
  Json j{{"phi_T", c.phi_t},
         {"phi_E", c.phi_e},
         {"phi1", c.boundaries.phi1},
         {"phi2", c.boundaries.phi2},
         {"utility", to_json(c.utility)},
         {"n_star", c.n_star},
         {"cohort_size", c.cohort_size},
         {"max_per_dose", c.max_per_dose},
         {"max_total", c.max_total},
         {"elimination",
          {{"phi_T_limit", c.elimination.phi_t_limit},
           {"phi_E_limit", c.elimination.phi_e_limit},
           {"cutoff", c.elimination.cutoff},
           {"min_n", c.elimination.min_n}}},
         {"mode", c.mode == EngineMode::kTableDriven ? "table" : "generator"},
         {"table_source", c.table_source == TableSource::kPaper ? "paper" : "generated"},
         {"exploration_override", c.exploration_override},
         {"auto_calibrate", c.auto_calibrate}};
  if (c.generator) {
    j["generator"] = {{"a0", c.generator->a0}, {"b0", c.generator->b0}, {"u_b", c.generator->u_b}};
  }
  return j;
}

MeritSpec merit_spec_from_json(const Json& j) {
  const Reader r(j, "");
  r.allow({"phi_T0", "phi_T1", "phi_E0", "phi_E1", "alpha", "beta", "J", "t1e_variant",
           "power_variant", "n_max"});
  MeritSpec s;
  s.phi_t0 = r.number("phi_T0", s.phi_t0);
  s.phi_t1 = r.number("phi_T1", s.phi_t1);
  s.phi_e0 = r.number("phi_E0", s.phi_e0);
  s.phi_e1 = r.number("phi_E1", s.phi_e1);
  s.alpha = r.number("alpha", s.alpha);
  s.beta_power = r.number("beta", s.beta_power);
  s.J = r.integer("J", s.J);
  s.n_max = r.integer("n_max", s.n_max);
  if (r.has("t1e_variant")) s.t1e_variant = parse_t1e_variant(r.string("t1e_variant", ""));
  if (r.has("power_variant")) s.power_variant = parse_power_variant(r.string("power_variant", ""));
  s.validate();
  return s;
}

Json to_json(const MeritSpec& s) {
  return {{"phi_T0", s.phi_t0},
          {"phi_T1", s.phi_t1},
          {"phi_E0", s.phi_e0},
          {"phi_E1", s.phi_e1},
          {"alpha", s.alpha},
          {"beta", s.beta_power},
          {"J", s.J},
          {"t1e_variant", to_string(s.t1e_variant)},
          {"power_variant", to_string(s.power_variant)},
          {"n_max", s.n_max}};
}

MeritDesign merit_design_from_json(const Json& j) {
  const Reader r(j, "");
  r.allow({"n", "m_T", "m_E"});
  require(r.has("n") && r.has("m_T") && r.has("m_E"), ErrorCode::kValidation,
          "design needs n, m_T and m_E");
  MeritDesign d{r.integer("n", 0), r.integer("m_T", 0), r.integer("m_E", 0)};
  d.validate();
  return d;
}

Json to_json(const MeritDesign& d) { return {{"n", d.n}, {"m_T", d.m_t}, {"m_E", d.m_e}}; }

DoseScenario scenario_from_json(const Json& j) {
  const Reader r(j, "");
  r.allow({"pi_T", "pi_E", "psi", "curves"});
  const double psi = r.number("psi", 0.0);
  if (r.has("curves")) {
    require(!r.has("pi_T") && !r.has("pi_E"), ErrorCode::kValidation,
            "give either curves or pi_T/pi_E, not both", "curves");
    const Reader c(r.at("curves"), "curves");
    c.allow({"gamma0", "gamma1", "beta0", "beta1", "beta2", "doses", "standardization"});
    EffToxCurves curves;
    curves.gamma0 = c.number("gamma0", curves.gamma0);
    curves.gamma1 = c.number("gamma1", curves.gamma1);
    curves.beta0 = c.number("beta0", curves.beta0);
    curves.beta1 = c.number("beta1", curves.beta1);
    curves.beta2 = c.number("beta2", curves.beta2);
    const std::string rule = c.string("standardization", "log_centered");
    if (rule == "log_centered") {
      curves.standardization = DoseStandardization::kLogCentered;
    } else if (rule == "centered") {
      curves.standardization = DoseStandardization::kCentered;
    } else if (rule == "raw") {
      curves.standardization = DoseStandardization::kRaw;
    } else {
      throw Error(ErrorCode::kValidation, "standardization must be log_centered, centered or raw",
                  "curves.standardization");
    }
    const std::vector<double> doses = c.numbers("doses");
    return scoped("curves", [&] { return curves_to_scenario(curves, doses, psi); });
  }
  const std::vector<double> t = r.numbers("pi_T");
  const std::vector<double> e = r.numbers("pi_E");
  DoseScenario s;
  s.pi_t = Eigen::Map<const Eigen::ArrayXd>(t.data(), t.size());
  s.pi_e = Eigen::Map<const Eigen::ArrayXd>(e.data(), e.size());
  s.psi = psi;
  s.validate();
  return s;
}

Json to_json(const DoseScenario& s) {
  return {{"pi_T", std::vector<double>(s.pi_t.begin(), s.pi_t.end())},
          {"pi_E", std::vector<double>(s.pi_e.begin(), s.pi_e.end())},
          {"psi", s.psi}};
}

TwoStageConfig two_stage_from_json(const Json& j) {
  const Reader r(j, "");
  r.allow({"phi_T", "phi1", "phi2", "cohort_size", "stage1_max_total", "elimination_cutoff",
           "carry", "merit_design", "merit_spec", "utility"});
  TwoStageConfig c;
  c.phi_t = r.number("phi_T", c.phi_t);
  check_probability(c.phi_t, "phi_T");
  if (r.has("phi1") || r.has("phi2")) {
    c.boundaries = scoped("phi1", [&] {
      return lambda_bounds(c.phi_t, r.number("phi1", 0.6 * c.phi_t),
                           r.number("phi2", 1.4 * c.phi_t));
    });
  }
  c.cohort_size = r.integer("cohort_size", c.cohort_size);
  c.stage1_max_total = r.integer("stage1_max_total", c.stage1_max_total);
  c.elimination_cutoff = r.number("elimination_cutoff", c.elimination_cutoff);
  c.carry = r.integer("carry", c.carry);
  require(!(r.has("merit_design") && r.has("merit_spec")), ErrorCode::kValidation,
          "give either merit_design or merit_spec, not both", "merit_spec");
  if (r.has("merit_design")) {
    c.stage2 = scoped("merit_design", [&] { return merit_design_from_json(r.at("merit_design")); });
  }
  if (r.has("merit_spec")) {
    c.stage2 = scoped("merit_spec", [&] { return merit_spec_from_json(r.at("merit_spec")); });
  }
  if (r.has("utility")) c.utility = scoped("utility", [&] { return utility_from_json(r.at("utility")); });
  c.validate();
  return c;
}

Json to_json(const TwoStageConfig& c) {
  const BoinBoundaries b = c.resolved_boundaries();
  Json j{{"phi_T", c.phi_t},
         {"phi1", b.phi1},
         {"phi2", b.phi2},
         {"cohort_size", c.cohort_size},
         {"stage1_max_total", c.stage1_max_total},
         {"elimination_cutoff", c.elimination_cutoff},
         {"carry", c.carry},
         {"utility", to_json(c.utility)}};
  if (const auto* d = std::get_if<MeritDesign>(&c.stage2)) j["merit_design"] = to_json(*d);
  if (const auto* s = std::get_if<MeritSpec>(&c.stage2)) j["merit_spec"] = to_json(*s);
  return j;
}

SimConfig sim_config_from_json(const Json& j) {
  const Reader r(j, "");
  r.allow({"scenario", "design", "boin12", "two_stage", "n_sim", "seed", "start_dose", "threads"});
  require(r.has("scenario"), ErrorCode::kValidation, "missing field", "scenario");
  SimConfig c;
  c.scenario = scoped("scenario", [&] { return scenario_from_json(r.at("scenario")); });
  const std::string design = r.string("design", "boin12");
  if (design == "boin12") {
    c.design = r.has("boin12") ? scoped("boin12", [&] { return boin12_from_json(r.at("boin12")); })
                               : Boin12Config{};
  } else if (design == "two_stage") {
    c.design = r.has("two_stage")
                   ? scoped("two_stage", [&] { return two_stage_from_json(r.at("two_stage")); })
                   : TwoStageConfig{};
  } else {
    throw Error(ErrorCode::kValidation, "design must be 'boin12' or 'two_stage'", "design");
  }
  c.n_sim = r.integer("n_sim", c.n_sim);
  if (r.has("seed")) {
    const Json& s = r.at("seed");
    if (s.is_number_unsigned()) {
      c.seed = s.get<std::uint64_t>();
    } else {
      require(s.is_string(), ErrorCode::kValidation, "seed must be an unsigned integer", "seed");
      try {
        size_t used = 0;
        c.seed = std::stoull(s.get<std::string>(), &used);
        require(used == s.get<std::string>().size(), ErrorCode::kValidation,
                "seed must be an unsigned integer", "seed");
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::kValidation, "seed must be an unsigned integer", "seed");
      }
    }
  }
  c.start_dose = r.integer("start_dose", 1) - 1;  // 1-based in files
  c.threads = r.integer("threads", c.threads);
  c.validate();
  return c;
}

Json to_json(const SimConfig& c) {
  Json j{{"scenario", to_json(c.scenario)},
         {"n_sim", c.n_sim},
         {"seed", std::to_string(c.seed)},
         {"start_dose", c.start_dose + 1},
         {"threads", c.threads}};
  if (const auto* b = std::get_if<Boin12Config>(&c.design)) {
    j["design"] = "boin12";
    j["boin12"] = to_json(*b);
  } else {
    j["design"] = "two_stage";
    j["two_stage"] = to_json(std::get<TwoStageConfig>(c.design));
  }
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot read " + path, "path");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kValidation, path + ": " + e.what(), "path");
  }
}

}  // namespace doseopt
