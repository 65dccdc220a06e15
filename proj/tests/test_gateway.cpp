#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "doseopt/api.hpp"
#include "doseopt/config.hpp"
#include "doseopt/error.hpp"
#include "doseopt/server.hpp"

// Kept after the project headers; Eigen fails to compile when it comes first.
#include <httplib.h>

using namespace doseopt;
namespace fs = std::filesystem;

namespace {

std::pair<ErrorCode, std::string> failure(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return {e.code(), e.field()};
  }
  FAIL("expected an error");
  return {};
}

std::string fixture_csv() {
  std::ifstream in(std::string(DOSEOPT_DATA_DIR) + "/rds_table_paper.csv", std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct LiveServer {
  fs::path dir;
  std::unique_ptr<Server> server;
  std::jthread thread;
  int port = 0;

  explicit LiveServer(std::string token = {}) {
    dir = fs::temp_directory_path() / ("doseopt-gateway-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    ServerOptions opt;
    opt.data_dir = dir.string();
    opt.token = std::move(token);
    server = std::make_unique<Server>(opt);
    port = server->bind("127.0.0.1", 0);
    thread = std::jthread([this] { server->serve(); });
    for (int i = 0; i < 200 && !server->running(); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }
  ~LiveServer() {
    server->stop();
    thread.join();
    server.reset();
    fs::remove_all(dir);
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

}  // namespace

TEST_CASE("configuration errors carry field paths") {
  CHECK(failure([] { boin12_from_json({{"phi_T", 1.5}}); }) ==
        std::pair(ErrorCode::kInvalidProbability, std::string("phi_T")));
  CHECK(failure([] { boin12_from_json({{"bogus", 1}}); }).second == "bogus");
  CHECK(failure([] { boin12_from_json({{"elimination", {{"cutoff", "abc"}}}}); }).second ==
        "elimination.cutoff");
  CHECK(failure([] { boin12_from_json({{"utility", {{40, 100}, {0, 150}}}}); })
            .second.rfind("utility", 0) == 0);
  CHECK(failure([] { merit_spec_from_json({{"phi_E1", 1.2}}); }) ==
        std::pair(ErrorCode::kInvalidProbability, std::string("phi_E1")));
  const auto scen = failure([] {
    sim_config_from_json({{"scenario", {{"pi_T", {0.1, 1.4}}, {"pi_E", {0.2, 0.3}}}}});
  });
  CHECK(scen.second.rfind("scenario.", 0) == 0);
  CHECK(failure([] {
          sim_config_from_json({{"scenario", {{"pi_T", {0.1}}, {"pi_E", {0.2}}}}, {"n_sim", 2.5}});
        }).second == "n_sim");
}

TEST_CASE("configurations round trip through their file form") {
  Boin12Config c;
  c.phi_t = 0.3;
  c.boundaries = lambda_bounds(0.3);
  c.elimination.phi_t_limit = 0.3;
  c.max_per_dose = 9;
  c.generator = RdsGeneratorParams{2, 1, 0.6};
  const Json j = to_json(c);
  CHECK(to_json(boin12_from_json(j)) == j);
  // Decimal strings are accepted wherever numbers are.
  const Boin12Config s = boin12_from_json({{"phi_T", "0.35"}, {"max_total", "30"}});
  CHECK(s.phi_t == 0.35);
  CHECK(s.max_total == 30);

  const Json scen = read_json_file(std::string(DOSEOPT_FIXTURE_DIR) + "/scenario_curves.json");
  CHECK(scenario_from_json(scen).size() == 5);
  const SimConfig sc = sim_config_from_json({{"scenario", scen}, {"design", "two_stage"}});
  CHECK(to_json(sim_config_from_json(to_json(sc))) == to_json(sc));
  MeritSpec m;
  m.J = 3;
  m.power_variant = PowerVariant::kAtLeastOne;
  CHECK(to_json(merit_spec_from_json(to_json(m))) == to_json(m));
  CHECK(failure([] { read_json_file("/nonexistent/x.json"); }).first == ErrorCode::kIo);
}

TEST_CASE("handlers") {
  const Json b = api_boundaries(0.35);
  CHECK(boundaries_line(b) == "0.276 0.419");
  CHECK(api_rds_table_csv(Json::object()) == fixture_csv());
  CHECK(api_rds_table_csv({{"table_source", "paper"}}) == fixture_csv());
  CHECK(api_advise(4, "two_stage")["low"] == 64);
  CHECK(failure([] { api_advise(4, "other"); }).second == "strategy");
  CHECK(api_brt({0.1, 0.5, 0.1, 0.3}, nullptr)["utility_brt"] == "72.000000");
  CHECK(failure([] { api_brt({0.1, 0.5, 0.1}, nullptr); }).second == "probs");
  const Json variants = api_merit_variants();
  CHECK(variants["variants"].size() == 6);
  CHECK(variants["selected"]["power_variant"] == to_string(MeritSpec{}.power_variant));
}

TEST_CASE("error mapping") {
  CHECK(http_status(ErrorCode::kNotFound) == 404);
  CHECK(http_status(ErrorCode::kConflict) == 409);
  CHECK(http_status(ErrorCode::kUnauthorized) == 401);
  CHECK(http_status(ErrorCode::kInvalidProbability) == 422);
  CHECK(http_status(ErrorCode::kCorruptLog) == 500);
  const ApiError e = to_api_error(Error(ErrorCode::kDoseMismatch, "m", "dose"));
  CHECK(to_json(e) == Json{{"error", {{"code", "dose_mismatch"}, {"message", "m"}, {"field", "dose"}}}});
}

TEST_CASE("HTTP service end to end") {
  LiveServer live;
  REQUIRE(live.server->running());
  auto cli = live.client();

  auto health = cli.Get("/v1/health");
  REQUIRE(health);
  CHECK(health->status == 200);

  auto bounds = cli.Get("/v1/designs/boin12/boundaries?target=0.35");
  REQUIRE(bounds);
  CHECK(Json::parse(bounds->body) == api_boundaries(0.35));
  auto bad_target = cli.Get("/v1/designs/boin12/boundaries?target=abc");
  CHECK(bad_target->status == 422);

  auto table = cli.Get("/v1/designs/boin12/table");
  REQUIRE(table);
  CHECK(table->status == 200);
  CHECK(table->body == fixture_csv());

  auto merit = cli.Post("/v1/designs/merit/search", R"({"alpha": 0.2, "beta": 0.7})",
                        "application/json");
  REQUIRE(merit);
  CHECK(merit->status == 200);
  CHECK(Json::parse(merit->body) == api_merit_search({{"alpha", 0.2}, {"beta", 0.7}}));
  auto invalid = cli.Post("/v1/designs/merit/search", R"({"phi_E1": 1.3})", "application/json");
  CHECK(invalid->status == 422);
  const Json err = Json::parse(invalid->body)["error"];
  CHECK(err["code"] == "invalid_probability");
  CHECK(err["field"] == "phi_E1");
  auto garbled = cli.Post("/v1/designs/merit/search", "{not json", "application/json");
  CHECK(garbled->status == 400);

  auto created = cli.Post("/v1/trials",
                          R"({"id": "cart", "config": {"table_source": "paper",
                              "max_per_dose": 6}, "num_doses": 3})",
                          "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  auto dup = cli.Post("/v1/trials", R"({"id": "cart", "num_doses": 3})", "application/json");
  CHECK(dup->status == 409);

  auto cohort = cli.Post("/v1/trials/cart/cohorts",
                         R"({"dose": 1, "size": 3, "n_tox": 0, "n_eff": 3})", "application/json");
  REQUIRE(cohort);
  CHECK(cohort->status == 200);
  const Json dec = Json::parse(cohort->body)["decision"];
  CHECK(dec["label"] == "stay");
  CHECK(dec["rationale"]["scores"][0] == 38);
  CHECK(dec["rationale"]["scores"][1] == 24);
  auto mismatch = cli.Post("/v1/trials/cart/cohorts",
                           R"({"dose": 3, "size": 3, "n_tox": 0, "n_eff": 3})",
                           "application/json");
  CHECK(mismatch->status == 422);
  CHECK(Json::parse(mismatch->body)["error"]["code"] == "dose_mismatch");
  auto over = cli.Post("/v1/trials/cart/cohorts",
                       R"({"dose": 1, "size": 3, "n_tox": 4, "n_eff": 3})", "application/json");
  CHECK(over->status == 422);

  auto got = cli.Get("/v1/trials/cart");
  CHECK(Json::parse(got->body)["total"] == 3);
  CHECK(cli.Get("/v1/trials/nope")->status == 404);
  auto early = cli.Post("/v1/trials/cart/close", "{}", "application/json");
  CHECK(early->status == 409);
  auto closed = cli.Post("/v1/trials/cart/close", R"({"force": true})", "application/json");
  CHECK(closed->status == 200);
  CHECK(Json::parse(closed->body)["interim"] == true);
  auto audit = cli.Get("/v1/trials/cart/audit");
  CHECK(Json::parse(audit->body)["log"].size() == 3);

  const std::string sim_body = R"({"scenario": {"pi_T": [0.05, 0.1, 0.15, 0.3],
      "pi_E": [0.1, 0.2, 0.6, 0.6], "psi": 1}, "n_sim": 200, "seed": 3})";
  auto job = cli.Post("/v1/simulations", sim_body, "application/json");
  REQUIRE(job);
  CHECK(job->status == 202);
  const std::string id = Json::parse(job->body)["id"];
  Json status;
  for (int i = 0; i < 600; ++i) {
    status = Json::parse(cli.Get("/v1/simulations/" + id)->body);
    if (status["status"] == "done" || status["status"] == "failed") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  REQUIRE(status["status"] == "done");
  CHECK(status["result"] == api_simulate(Json::parse(sim_body)));
  auto bad_job = cli.Post("/v1/simulations", R"({"scenario": {"pi_T": [2], "pi_E": [0.1]}})",
                          "application/json");
  CHECK(bad_job->status == 422);
}

TEST_CASE("bearer authentication") {
  LiveServer live("s3cret");
  auto cli = live.client();
  CHECK(cli.Get("/v1/health")->status == 200);
  auto denied = cli.Get("/v1/designs/merit/variants");
  CHECK(denied->status == 401);
  CHECK(Json::parse(denied->body)["error"]["code"] == "unauthorized");
  httplib::Headers auth{{"Authorization", "Bearer s3cret"}};
  CHECK(cli.Get("/v1/designs/merit/variants", auth)->status == 200);
  httplib::Headers wrong{{"Authorization", "Bearer nope"}};
  CHECK(cli.Get("/v1/designs/merit/variants", wrong)->status == 401);
}
