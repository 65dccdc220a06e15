#pragma once

// Live trials as append-only line-delimited logs. Line 1 is a header with
// the format version and the configuration snapshot; every later line is a
// cohort or close event carrying the decision it produced. State is always
// a fold over the log, so replaying a file reproduces it exactly.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "doseopt/boin12.hpp"
#include "doseopt/config.hpp"

namespace doseopt {

inline constexpr int kTrialLogVersion = 1;

enum class TrialStatus { kEnrolling, kTerminated, kClosed };
std::string to_string(TrialStatus s);

struct CohortEvent {
  int dose = 0;  // 0-based
  int size = 0;
  int n_tox = 0;
  int n_eff = 0;
  std::string timestamp;  // filled with the current UTC time when empty
  std::string note;
  bool override_dose = false;  // dose differs from the recommendation on purpose
  std::string event_key;       // optional client key; repeats are idempotent

  friend bool operator==(const CohortEvent&, const CohortEvent&) = default;
};

struct TrialEntry {
  CohortEvent event;
  Decision decision;

  friend bool operator==(const TrialEntry&, const TrialEntry&) = default;
};

struct TrialState {
  std::string id;
  Boin12Config config;
  int num_doses = 0;
  int start_dose = 0;
  std::string created;
  TrialStatus status = TrialStatus::kEnrolling;
  std::vector<DoseState> doses;
  Decision next;  // recommendation for the next cohort
  std::vector<TrialEntry> log;
  bool closed_interim = false;
  std::optional<int> obd;
  std::vector<std::string> warnings;

  int total() const;
};

// Field-by-field equality; configurations compare through their file form.
bool operator==(const TrialState& a, const TrialState& b);

struct FinalReport {
  std::string id;
  std::optional<int> obd;
  bool interim = false;
  Json audit;
};

// Decision rendered for logs and API responses; treated is the dose of the
// cohort that produced it (-1 for the initial recommendation).
Json decision_json(const Decision& d, int treated, const Boin12Config& cfg);
Json state_json(const TrialState& s);

class TrialStore {
 public:
  // Loads (replays) every log already in dir; unreadable logs are reported
  // through load_errors() and answer kCorruptLog on access.
  explicit TrialStore(std::string dir);

  TrialState create_trial(const std::string& id, const Boin12Config& cfg, int num_doses,
                          int start_dose = 0);
  // Appends the event durably, then returns the resulting decision.
  Decision record_cohort(const std::string& id, CohortEvent event);
  FinalReport close_trial(const std::string& id, bool force = false);

  TrialState get(const std::string& id) const;
  std::vector<std::string> ids() const;
  Json audit(const std::string& id) const;
  // Rebuilds the state from the file alone.
  TrialState replay(const std::string& id) const;
  const std::map<std::string, std::string>& load_errors() const { return broken_; }

  std::string log_path(const std::string& id) const;

 private:
  struct Trial {
    std::mutex write;
    TrialState state;
    std::unique_ptr<Boin12Engine> engine;
  };
  std::shared_ptr<Trial> find(const std::string& id) const;

  std::string dir_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Trial>> trials_;
  std::map<std::string, std::string> broken_;
};

// Replays a log file; throws kCorruptLog naming the line (and byte offset)
// of the first unreadable or inconsistent record.
TrialState replay_log(const std::string& path);

}  // namespace doseopt
