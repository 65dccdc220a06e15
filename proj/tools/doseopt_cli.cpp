// Command-line front end; every subcommand calls the same handlers as the HTTP service.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "doseopt/api.hpp"
#include "doseopt/error.hpp"
#include "doseopt/merit.hpp"
#include "doseopt/server.hpp"

using namespace doseopt;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot read " + path, "path");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::kIo, "cannot write " + path, "out");
  out << text;
}

Json optional_file(const std::string& path) {
  return path.empty() ? Json::object() : read_json_file(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dose-optimization design engine"};
  app.require_subcommand(1);

  auto* bnd = app.add_subcommand("boundaries", "Escalation/de-escalation boundaries for a target");
  double target = 0.0;
  std::optional<double> phi1, phi2;
  bool bnd_json = false;
  bnd->add_option("--target", target, "Target toxicity rate")->required();
  bnd->add_option("--phi1", phi1, "Sub-toxic reference (default 0.6 target)");
  bnd->add_option("--phi2", phi2, "Over-toxic reference (default 1.4 target)");
  bnd->add_flag("--json", bnd_json, "Print all fields as JSON");

  auto* rds = app.add_subcommand("rds-table", "Generate a rank-based desirability table");
  std::string rds_config, rds_out;
  int n_max = -1;
  std::vector<int> n_values;
  rds->add_option("--config", rds_config, "Design configuration (JSON)");
  rds->add_option("--n-max", n_max, "Tabulate every patient count 0..k");
  rds->add_option("--n-values", n_values, "Explicit patient counts")->delimiter(',');
  rds->add_option("--out", rds_out, "Output CSV (stdout if omitted)");

  auto* cal = app.add_subcommand("calibrate", "Fit generator constants to a reference table");
  std::string cal_reference, cal_config;
  cal->add_option("--reference", cal_reference, "Reference table CSV")->required();
  cal->add_option("--config", cal_config, "Design configuration (JSON)");

  auto* mer = app.add_subcommand("merit", "Minimal-n randomized-stage design search");
  std::string spec_file, table_csv, report_md;
  std::optional<double> t0, t1, e0, e1, alpha, beta;
  std::optional<int> J;
  std::optional<std::string> t1e_variant, power_variant;
  bool table3 = false;
  mer->add_option("--spec", spec_file, "Spec file (JSON)");
  mer->add_option("--phi-t0", t0, "Unacceptable toxicity rate");
  mer->add_option("--phi-t1", t1, "Acceptable toxicity rate");
  mer->add_option("--phi-e0", e0, "Unacceptable efficacy rate");
  mer->add_option("--phi-e1", e1, "Target efficacy rate");
  mer->add_option("--alpha", alpha, "Generalized type I error budget");
  mer->add_option("--beta", beta, "Generalized power target");
  mer->add_option("--doses", J, "Number of randomized doses");
  mer->add_option("--t1e-variant", t1e_variant, "per_dose | familywise_any");
  mer->add_option("--power-variant", power_variant, "per_dose | all_admissible | at_least_one");
  mer->add_flag("--table", table3, "Fit every variant to the published design table");
  mer->add_option("--table-csv", table_csv, "With --table: write the selected variant's table");
  mer->add_option("--report", report_md, "With --table: write the discrepancy report");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo operating characteristics");
  std::string sim_config, sim_out, sim_format = "csv";
  sim->add_option("--config", sim_config, "Simulation configuration (JSON)")->required();
  sim->add_option("--out", sim_out, "Report file (stdout if omitted)");
  sim->add_option("--format", sim_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  auto* brt = app.add_subcommand("brt", "Utility benefit-risk score of an outcome distribution");
  std::vector<double> probs;
  std::string utility_file;
  brt->add_option("--probs", probs, "p00 p01 p10 p11 (toxicity, efficacy)")->required()->expected(4);
  brt->add_option("--utility", utility_file, "Utility table file: [[u00,u01],[u10,u11]]");

  auto* srv = app.add_subcommand("serve", "Run the HTTP service");
  std::string addr = "127.0.0.1:8080", data_dir = "trials", token;
  int workers = 2;
  srv->add_option("--addr", addr, "host:port");
  srv->add_option("--data", data_dir, "Trial log directory");
  srv->add_option("--token", token, "Bearer token (or DOSEOPT_TOKEN)");
  srv->add_option("--sim-workers", workers, "Simulation worker threads");

  auto* adv = app.add_subcommand("advise", "Rule-of-thumb sample size");
  int doses = 0, arms = 2;
  std::string strategy;
  adv->add_option("--doses", doses, "Number of doses J")->required();
  adv->add_option("--strategy", strategy, "efficacy_integrated | two_stage")->required();
  adv->add_option("--arms", arms, "Randomized arms (two_stage)");

  auto* val = app.add_subcommand("validate-scenario", "Check every per-dose joint pmf");
  std::string scenario_file;
  val->add_option("--scenario", scenario_file, "Scenario file (JSON)")->required();

  auto* rep = app.add_subcommand("replay", "Replay a trial log and print the resulting state");
  std::string log_file;
  rep->add_option("--log", log_file, "Trial log (.jsonl)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bnd) {
      const Json b = api_boundaries(target, phi1, phi2);
      std::cout << (bnd_json ? b.dump(2) : boundaries_line(b)) << '\n';
    } else if (*rds) {
      std::vector<int> ns = n_values;
      if (n_max >= 0) {
        require(ns.empty(), ErrorCode::kValidation, "give --n-max or --n-values, not both",
                "n_values");
        for (int n = 0; n <= n_max; ++n) ns.push_back(n);
      }
      const Json config = rds_config.empty() ? Json::object() : read_json_file(rds_config);
      write_or_print(rds_out, api_rds_table_csv(config, ns));
    } else if (*cal) {
      std::cout << api_calibrate(read_text(cal_reference), optional_file(cal_config)).dump(2)
                << '\n';
    } else if (*mer) {
      if (table3) {
        const std::vector<VariantFit> fits = fit_merit_variants();
        if (!table_csv.empty()) write_or_print(table_csv, merit_table_csv(fits.front()));
        const std::string report = merit_discrepancy_report(fits);
        write_or_print(report_md.empty() ? "-" : report_md, report);
        return 0;
      }
      Json spec = optional_file(spec_file);
      auto set = [&](const char* key, const auto& v) {
        if (v) spec[key] = *v;
      };
      set("phi_T0", t0);
      set("phi_T1", t1);
      set("phi_E0", e0);
      set("phi_E1", e1);
      set("alpha", alpha);
      set("beta", beta);
      set("J", J);
      set("t1e_variant", t1e_variant);
      set("power_variant", power_variant);
      const Json r = api_merit_search(spec);
      std::cout << "n=" << r["n"] << " m_T=" << r["m_T"] << " m_E=" << r["m_E"]
                << " t1e=" << r["t1e"].get<std::string>()
                << " power=" << r["power"].get<std::string>() << '\n';
    } else if (*sim) {
      const Json config = read_json_file(sim_config);
      write_or_print(sim_out, sim_format == "csv" ? api_simulate_csv(config)
                                                  : api_simulate(config).dump(2) + "\n");
    } else if (*brt) {
      const Json u = utility_file.empty() ? Json(nullptr) : read_json_file(utility_file);
      std::cout << api_brt(probs, u).at("utility_brt").get<std::string>() << '\n';
    } else if (*srv) {
      const auto colon = addr.rfind(':');
      require(colon != std::string::npos, ErrorCode::kValidation, "--addr must be host:port",
              "addr");
      if (token.empty()) {
        if (const char* env = std::getenv("DOSEOPT_TOKEN")) token = env;
      }
      Server server({data_dir, token, workers});
      const int port = server.bind(addr.substr(0, colon), std::stoi(addr.substr(colon + 1)));
      std::cerr << "listening on " << addr.substr(0, colon) << ':' << port << '\n';
      server.serve();
    } else if (*adv) {
      const Json r = api_advise(doses, strategy, arms);
      std::cout << r.at("low") << ' ' << r.at("high") << '\n';
    } else if (*val) {
      const Json s = read_json_file(scenario_file);
      const DoseScenario scenario = scenario_from_json(s);
      std::cout << "ok: " << scenario.size() << " doses, every joint pmf cell nonnegative\n";
    } else if (*rep) {
      std::cout << state_json(replay_log(log_file)).dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    const ApiError err = to_api_error(e);
    std::cerr << "error[" << err.code << "]" << (err.field.empty() ? "" : " " + err.field) << ": "
              << err.message << '\n';
    return 1;
  }
  return 0;
}
