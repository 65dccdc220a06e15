#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "doseopt/conduct.hpp"
#include "doseopt/error.hpp"

using namespace doseopt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("doseopt-conduct-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

CohortEvent cohort(int dose, int tox, int eff, bool override_dose = false) {
  CohortEvent e;
  e.dose = dose;
  e.size = 3;
  e.n_tox = tox;
  e.n_eff = eff;
  e.timestamp = "2026-01-01T00:00:00Z";
  e.override_dose = override_dose;
  return e;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kValidation;
}

}  // namespace

TEST_CASE("worked example reproduced through the log") {
  TempDir dir;
  TrialStore store(dir.path.string());
  store.create_trial("worked", Boin12Config::paper(), 3);
  store.record_cohort("worked", cohort(0, 0, 0, true));
  store.record_cohort("worked", cohort(1, 0, 2, true));
  store.record_cohort("worked", cohort(2, 2, 1, true));
  const Decision d = store.record_cohort("worked", cohort(1, 1, 1, true));
  CHECK(d.action == Action::kAssign);
  CHECK(d.dose == 1);
  CHECK(d.rationale.scores[0] == 13);
  CHECK(d.rationale.scores[1] == 23);
  CHECK(d.rationale.scores[2] == 11);
  const Json j = decision_json(d, 1, store.get("worked").config);
  CHECK(j["label"] == "stay");
  CHECK(j["dose"] == 2);
  CHECK(j["rationale"]["scores"] == Json::array({13, 23, 11}));
  CHECK(j["rationale"]["lambda_e"].get<std::string>().rfind("0.276", 0) == 0);
  CHECK(store.replay("worked") == store.get("worked"));
}

TEST_CASE("CAR-T example following every recommendation") {
  TempDir dir;
  TrialStore store(dir.path.string());
  const TrialState s0 = store.create_trial("cart", Boin12Config::paper(), 3);
  CHECK(s0.next.dose == 0);
  Decision d = store.record_cohort("cart", cohort(0, 0, 3));
  CHECK(d.dose == 0);
  CHECK(d.rationale.scores[0] == 38);
  CHECK(d.rationale.scores[1] == 24);
  CHECK(store.replay("cart") == store.get("cart"));
  d = store.record_cohort("cart", cohort(0, 0, 3));
  CHECK(d.dose == 1);
  CHECK(d.rationale.override_fired);
  CHECK(store.replay("cart") == store.get("cart"));
  CHECK(store.get("cart").total() == 6);
}

TEST_CASE("shipped CAR-T log replays to the recorded decisions") {
  const TrialState s = replay_log(std::string(DOSEOPT_FIXTURE_DIR) + "/cart_trial.jsonl");
  REQUIRE(s.log.size() == 2);
  CHECK(s.log[0].decision.dose == 0);
  CHECK(s.log[1].decision.dose == 0);
  CHECK(s.next.dose == 0);
  CHECK(s.doses[0] == DoseState{5, 0, 5, false, EliminationReason::kNone});
}

TEST_CASE("property: replay equals live state after every event") {
  TempDir dir;
  TrialStore store(dir.path.string());
  Boin12Config cfg;  // generated table, 12 per dose
  store.create_trial("walk", cfg, 4);
  Rng rng(5, 0);
  for (int i = 0; i < 12; ++i) {
    const TrialState s = store.get("walk");
    if (s.status != TrialStatus::kEnrolling) break;
    const int tox = static_cast<int>(rng.uniform() * 2);
    const int eff = static_cast<int>(rng.uniform() * 4);
    store.record_cohort("walk", cohort(s.next.dose, tox, eff));
    REQUIRE(store.replay("walk") == store.get("walk"));
  }
}

TEST_CASE("dose mismatches, eliminated doses and caps") {
  TempDir dir;
  TrialStore store(dir.path.string());
  store.create_trial("t", Boin12Config::paper(), 3);
  CHECK(code_of([&] { store.record_cohort("t", cohort(1, 0, 0)); }) == ErrorCode::kDoseMismatch);
  store.record_cohort("t", cohort(1, 3, 0, true));  // safety-eliminates doses 2 and 3
  CHECK(store.get("t").doses[2].eliminated);
  CHECK(code_of([&] { store.record_cohort("t", cohort(2, 0, 0, true)); }) ==
        ErrorCode::kValidation);
  CohortEvent bad = cohort(0, 4, 0);
  CHECK(code_of([&] { store.record_cohort("t", bad); }) == ErrorCode::kValidation);
  // Rejected events leave no trace in the log.
  CHECK(store.replay("t").log.size() == 1);
}

TEST_CASE("termination, close and the final report") {
  TempDir dir;
  TrialStore store(dir.path.string());
  store.create_trial("tox", Boin12Config::paper(), 3);
  const Decision d = store.record_cohort("tox", cohort(0, 3, 0));
  CHECK(d.action == Action::kTerminate);
  CHECK(store.get("tox").status == TrialStatus::kTerminated);
  CHECK(code_of([&] { store.record_cohort("tox", cohort(0, 0, 0, true)); }) ==
        ErrorCode::kWrongStatus);
  const FinalReport r = store.close_trial("tox");
  CHECK_FALSE(r.obd.has_value());
  CHECK_FALSE(r.interim);
  CHECK(r.audit["log"].size() == 3);
  CHECK(code_of([&] { store.close_trial("tox", true); }) == ErrorCode::kWrongStatus);
  CHECK(store.replay("tox") == store.get("tox"));

  store.create_trial("open", Boin12Config::paper(), 3);
  store.record_cohort("open", cohort(0, 0, 3));
  CHECK(code_of([&] { store.close_trial("open"); }) == ErrorCode::kWrongStatus);
  const FinalReport interim = store.close_trial("open", true);
  CHECK(interim.interim);
  CHECK(interim.obd == 0);
  CHECK(store.replay("open") == store.get("open"));
}

TEST_CASE("ids, duplicates and idempotent event keys") {
  TempDir dir;
  TrialStore store(dir.path.string());
  store.create_trial("a", Boin12Config::paper(), 3);
  CHECK(code_of([&] { store.create_trial("a", Boin12Config::paper(), 3); }) ==
        ErrorCode::kConflict);
  CHECK(code_of([&] { store.create_trial("../x", Boin12Config::paper(), 3); }) ==
        ErrorCode::kValidation);
  CHECK(code_of([&] { store.get("missing"); }) == ErrorCode::kNotFound);
  CohortEvent e = cohort(0, 0, 1);
  e.event_key = "visit-1";
  const Decision first = store.record_cohort("a", e);
  const Decision again = store.record_cohort("a", e);
  CHECK(first == again);
  CHECK(store.get("a").log.size() == 1);
  CHECK(store.replay("a").log[0].event.event_key == "visit-1");
  CHECK(store.ids() == std::vector<std::string>{"a"});
}

TEST_CASE("restart reloads every trial from disk") {
  TempDir dir;
  TrialState before;
  {
    TrialStore store(dir.path.string());
    store.create_trial("r", Boin12Config::paper(), 4, 1);
    store.record_cohort("r", cohort(1, 0, 2));
    before = store.get("r");
  }
  TrialStore again(dir.path.string());
  CHECK(again.get("r") == before);
  CHECK(again.load_errors().empty());
}

TEST_CASE("concurrent writers to different trials") {
  TempDir dir;
  TrialStore store(dir.path.string());
  for (const char* id : {"p", "q", "r", "s"}) store.create_trial(id, Boin12Config{}, 4);
  std::vector<std::jthread> workers;
  for (const char* id : {"p", "q", "r", "s"}) {
    workers.emplace_back([&store, id] {
      for (int i = 0; i < 6; ++i) {
        const TrialState s = store.get(id);
        if (s.status != TrialStatus::kEnrolling) return;
        store.record_cohort(id, cohort(s.next.dose, 0, 1));
      }
    });
  }
  workers.clear();
  for (const char* id : {"p", "q", "r", "s"}) CHECK(store.replay(id) == store.get(id));
}

TEST_CASE("corrupt logs name the offending line") {
  TempDir dir;
  {
    TrialStore store(dir.path.string());
    store.create_trial("c", Boin12Config::paper(), 3);
    store.record_cohort("c", cohort(0, 0, 3));
    store.record_cohort("c", cohort(0, 0, 3));
  }
  const fs::path log = dir.path / "c.jsonl";
  const std::string good = slurp(log);

  auto expect_corrupt = [&](const std::string& text, const std::string& field) {
    spit(log, text);
    try {
      replay_log(log.string());
      FAIL("expected a corrupt log");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kCorruptLog);
      CHECK(e.field() == field);
    }
  };
  expect_corrupt(good.substr(0, good.size() - 1), "line 3");  // torn final write
  expect_corrupt(good.substr(0, good.size() - 10) + "\n", "line 3");
  std::string tampered = good;
  tampered.replace(tampered.rfind("\"n_eff\":3"), 9, "\"n_eff\":0");
  expect_corrupt(tampered, "line 3");
  std::string reseq = good;
  reseq.replace(reseq.rfind("\"seq\":2"), 7, "\"seq\":5");
  expect_corrupt(reseq, "line 3");
  expect_corrupt("", "line 1");
  expect_corrupt("{\"type\":\"cohort\"}\n", "line 1");

  spit(log, tampered);
  TrialStore reopened(dir.path.string());
  CHECK(reopened.load_errors().contains("c"));
  CHECK(code_of([&] { reopened.get("c"); }) == ErrorCode::kCorruptLog);
  CHECK(code_of([&] { replay_log(std::string(DOSEOPT_FIXTURE_DIR) + "/corrupt_trial.jsonl"); }) ==
        ErrorCode::kCorruptLog);
}
