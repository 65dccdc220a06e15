#include "doseopt/conduct.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "doseopt/error.hpp"

namespace doseopt {

namespace fs = std::filesystem;

std::string to_string(TrialStatus s) {
  switch (s) {
    case TrialStatus::kEnrolling: return "enrolling";
    case TrialStatus::kTerminated: return "terminated";
    case TrialStatus::kClosed: return "closed";
  }
  return "?";
}

int TrialState::total() const {
  return std::accumulate(doses.begin(), doses.end(), 0,
                         [](int acc, const DoseState& d) { return acc + d.n; });
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json score_json(const std::optional<double>& s, const Boin12Config& cfg) {
  if (!s) return nullptr;
  if (cfg.mode == EngineMode::kTableDriven) return static_cast<int>(*s);
  return decimal(*s);
}

void check_id(const std::string& id) {
  require(!id.empty() && id.size() <= 64 &&
              std::all_of(id.begin(), id.end(),
                          [](char c) { return std::isalnum(static_cast<unsigned char>(c)) ||
                                              c == '-' || c == '_'; }),
          ErrorCode::kValidation, "trial id must be 1-64 characters of [A-Za-z0-9_-]", "id");
}

void append_line(const std::string& path, const std::string& line, bool create) {
  const int flags = O_WRONLY | O_APPEND | (create ? O_CREAT | O_EXCL : 0);
  const int fd = ::open(path.c_str(), flags, 0644);
  if (fd < 0) {
    require(!(create && errno == EEXIST), ErrorCode::kConflict, "trial log already exists", "id");
    throw Error(ErrorCode::kIo, "cannot open " + path + " for appending", "path");
  }
  const std::string data = line + "\n";
  size_t written = 0;
  while (written < data.size()) {
    const ssize_t w = ::write(fd, data.data() + written, data.size() - written);
    if (w < 0) {
      ::close(fd);
      throw Error(ErrorCode::kIo, "write to " + path + " failed", "path");
    }
    written += static_cast<size_t>(w);
  }
  const bool synced = ::fsync(fd) == 0;
  ::close(fd);
  require(synced, ErrorCode::kIo, "fsync of " + path + " failed", "path");
}

Json cohort_line(const TrialEntry& e, int seq, const Boin12Config& cfg) {
  Json j{{"type", "cohort"},
         {"seq", seq},
         {"dose", e.event.dose + 1},
         {"size", e.event.size},
         {"n_tox", e.event.n_tox},
         {"n_eff", e.event.n_eff},
         {"timestamp", e.event.timestamp},
         {"note", e.event.note},
         {"override", e.event.override_dose},
         {"decision", decision_json(e.decision, e.event.dose, cfg)}};
  if (!e.event.event_key.empty()) j["event_key"] = e.event.event_key;
  return j;
}

// The fold step shared by live recording and replay.
Decision apply_cohort(TrialState& s, const Boin12Engine& engine, const CohortEvent& ev) {
  require(s.status == TrialStatus::kEnrolling, ErrorCode::kWrongStatus,
          "trial " + s.id + " is " + to_string(s.status) + ", not enrolling", "status");
  require(ev.dose >= 0 && ev.dose < s.num_doses, ErrorCode::kValidation,
          "dose must lie in 1.." + std::to_string(s.num_doses), "dose");
  require(ev.size >= 1, ErrorCode::kValidation, "cohort size must be at least 1", "size");
  require(ev.n_tox >= 0 && ev.n_tox <= ev.size, ErrorCode::kValidation,
          "toxicity count must lie in [0, cohort size]", "n_tox");
  require(ev.n_eff >= 0 && ev.n_eff <= ev.size, ErrorCode::kValidation,
          "efficacy count must lie in [0, cohort size]", "n_eff");
  if (!ev.override_dose) {
    require(s.next.action == Action::kAssign && s.next.dose == ev.dose, ErrorCode::kDoseMismatch,
            "cohort dose " + std::to_string(ev.dose + 1) + " differs from the recommended dose " +
                (s.next.dose >= 0 ? std::to_string(s.next.dose + 1) : std::string("(none)")) +
                "; set override to record it anyway",
            "dose");
  }
  require(!s.doses[ev.dose].eliminated, ErrorCode::kValidation,
          "dose " + std::to_string(ev.dose + 1) + " has been eliminated", "dose");
  require(s.doses[ev.dose].n + ev.size <= engine.config().max_per_dose, ErrorCode::kValidation,
          "cohort would exceed max_per_dose at dose " + std::to_string(ev.dose + 1), "size");

  std::vector<DoseState> doses = s.doses;
  doses[ev.dose].n += ev.size;
  doses[ev.dose].n_tox += ev.n_tox;
  doses[ev.dose].n_eff += ev.n_eff;
  doses = refresh_eliminations(doses, engine.config());
  Decision d = engine.decide(doses, ev.dose);

  s.doses = std::move(doses);
  s.next = d;
  s.log.push_back({ev, d});
  if (d.action == Action::kTerminate) s.status = TrialStatus::kTerminated;
  return d;
}

std::optional<int> final_obd(const TrialState& s, const Boin12Engine& engine) {
  return engine.select_obd(s.doses);
}

Json header_line(const TrialState& s) {
  return {{"type", "header"},
          {"format", "doseopt-trial"},
          {"version", kTrialLogVersion},
          {"id", s.id},
          {"created", s.created},
          {"num_doses", s.num_doses},
          {"start_dose", s.start_dose + 1},
          {"config", to_json(s.config)}};
}

TrialState initial_state(const std::string& id, const Boin12Engine& engine,
                         const Boin12Config& cfg, int num_doses, int start_dose,
                         std::string created) {
  TrialState s;
  s.id = id;
  s.config = cfg;
  s.num_doses = num_doses;
  s.start_dose = start_dose;
  s.created = std::move(created);
  s.doses.assign(num_doses, DoseState{});
  s.next = engine.decide(s.doses, start_dose);
  s.warnings = engine.warnings();
  return s;
}

[[noreturn]] void corrupt(const std::string& path, size_t line, size_t offset,
                          const std::string& why) {
  throw Error(ErrorCode::kCorruptLog,
              path + ": line " + std::to_string(line) + " (byte offset " + std::to_string(offset) +
                  "): " + why,
              "line " + std::to_string(line));
}

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw std::runtime_error(std::string("missing field '") + key + "'");
  return j.at(key).get<T>();
}

// Log replay with the engine it builds; used at boot and by replay().
std::pair<TrialState, std::unique_ptr<Boin12Engine>> replay_with_engine(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kNotFound, "no trial log at " + path, "id");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();

  TrialState s;
  std::unique_ptr<Boin12Engine> engine;
  size_t pos = 0, line_no = 0;
  bool closed_seen = false;
  while (pos < data.size()) {
    ++line_no;
    const size_t end = data.find('\n', pos);
    if (end == std::string::npos) corrupt(path, line_no, pos, "truncated record (no newline)");
    const std::string line = data.substr(pos, end - pos);
    const size_t offset = pos;
    pos = end + 1;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      corrupt(path, line_no, offset, std::string("unparseable record: ") + e.what());
    }
    try {
      const std::string type = field<std::string>(j, "type");
      if (line_no == 1) {
        if (type != "header" || field<std::string>(j, "format") != "doseopt-trial") {
          corrupt(path, line_no, offset, "first line is not a trial log header");
        }
        const int version = field<int>(j, "version");
        if (version != kTrialLogVersion) {
          corrupt(path, line_no, offset, "unsupported log version " + std::to_string(version));
        }
        const Boin12Config cfg = boin12_from_json(j.at("config"));
        engine = std::make_unique<Boin12Engine>(Boin12Engine::create(cfg));
        const int num_doses = field<int>(j, "num_doses");
        const int start = field<int>(j, "start_dose") - 1;
        if (num_doses < 1 || start < 0 || start >= num_doses) {
          corrupt(path, line_no, offset, "invalid dose grid in header");
        }
        s = initial_state(field<std::string>(j, "id"), *engine, cfg, num_doses, start,
                          field<std::string>(j, "created"));
        continue;
      }
      if (closed_seen) corrupt(path, line_no, offset, "record after close");
      if (field<int>(j, "seq") != static_cast<int>(line_no - 1)) {
        corrupt(path, line_no, offset, "sequence number out of order");
      }
      if (type == "cohort") {
        CohortEvent ev;
        ev.dose = field<int>(j, "dose") - 1;
        ev.size = field<int>(j, "size");
        ev.n_tox = field<int>(j, "n_tox");
        ev.n_eff = field<int>(j, "n_eff");
        ev.timestamp = field<std::string>(j, "timestamp");
        ev.note = field<std::string>(j, "note");
        ev.override_dose = field<bool>(j, "override");
        if (j.contains("event_key")) ev.event_key = field<std::string>(j, "event_key");
        const Decision d = apply_cohort(s, *engine, ev);
        if (decision_json(d, ev.dose, s.config) != j.at("decision")) {
          corrupt(path, line_no, offset, "stored decision differs from the recomputed one");
        }
      } else if (type == "close") {
        const bool forced = field<bool>(j, "forced");
        if (s.status == TrialStatus::kEnrolling && !forced) {
          corrupt(path, line_no, offset, "unforced close while enrolling");
        }
        s.closed_interim = s.status == TrialStatus::kEnrolling;
        s.obd = final_obd(s, *engine);
        const Json stored = j.at("obd");
        const Json expect = s.obd ? Json(*s.obd + 1) : Json(nullptr);
        if (stored != expect) corrupt(path, line_no, offset, "stored OBD differs from recomputed");
        s.status = TrialStatus::kClosed;
        closed_seen = true;
      } else {
        corrupt(path, line_no, offset, "unknown record type '" + type + "'");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kCorruptLog) throw;
      corrupt(path, line_no, offset, std::string("inconsistent record: ") + e.what());
    } catch (const std::exception& e) {
      corrupt(path, line_no, offset, std::string("malformed record: ") + e.what());
    }
  }
  if (line_no == 0) corrupt(path, 1, 0, "empty log (missing header)");
  return {std::move(s), std::move(engine)};
}

}  // namespace

Json decision_json(const Decision& d, int treated, const Boin12Config& cfg) {
  std::string label = "terminate";
  if (d.action == Action::kAssign) {
    label = treated < 0 ? "start" : d.dose == treated ? "stay" : d.dose > treated ? "escalate"
                                                                                  : "de-escalate";
  }
  const Rationale& r = d.rationale;
  Json candidates = Json::array(), scores = Json::array(), eliminated = Json::array();
  for (int c : r.candidates) candidates.push_back(c + 1);
  for (const auto& s : r.scores) scores.push_back(score_json(s, cfg));
  for (bool e : r.eliminated) eliminated.push_back(e);
  Json why{{"current", r.current + 1},
           {"current_n", r.current_n},
           {"current_tox", r.current_tox},
           {"zone", r.zone ? Json(to_string(*r.zone)) : Json(nullptr)},
           {"lambda_e", decimal(cfg.boundaries.lambda_e)},
           {"lambda_d", decimal(cfg.boundaries.lambda_d)},
           {"candidates", candidates},
           {"scores", scores},
           {"eliminated", eliminated},
           {"override_fired", r.override_fired},
           {"fallback_used", r.fallback_used},
           {"note", r.note}};
  if (r.current_n > 0) why["p_hat"] = decimal(static_cast<double>(r.current_tox) / r.current_n);
  return {{"action", d.action == Action::kAssign ? "assign" : "terminate"},
          {"label", label},
          {"dose", d.action == Action::kAssign ? Json(d.dose + 1) : Json(nullptr)},
          {"rationale", why}};
}

Json state_json(const TrialState& s) {
  Json doses = Json::array();
  for (size_t j = 0; j < s.doses.size(); ++j) {
    const DoseState& d = s.doses[j];
    doses.push_back({{"dose", j + 1},
                     {"n", d.n},
                     {"n_tox", d.n_tox},
                     {"n_eff", d.n_eff},
                     {"eliminated", d.eliminated},
                     {"reason", to_string(d.reason)}});
  }
  const int last = s.log.empty() ? -1 : s.log.back().event.dose;
  return {{"id", s.id},
          {"status", to_string(s.status)},
          {"created", s.created},
          {"num_doses", s.num_doses},
          {"start_dose", s.start_dose + 1},
          {"cohorts", s.log.size()},
          {"total", s.total()},
          {"doses", doses},
          {"next", decision_json(s.next, last, s.config)},
          {"obd", s.obd ? Json(*s.obd + 1) : Json(nullptr)},
          {"interim_closure", s.closed_interim},
          {"warnings", s.warnings},
          {"config", to_json(s.config)}};
}

TrialState replay_log(const std::string& path) { return replay_with_engine(path).first; }

bool operator==(const TrialState& a, const TrialState& b) {
  return a.id == b.id && to_json(a.config) == to_json(b.config) && a.num_doses == b.num_doses &&
         a.start_dose == b.start_dose && a.created == b.created && a.status == b.status &&
         a.doses == b.doses && a.next == b.next && a.log == b.log &&
         a.closed_interim == b.closed_interim && a.obd == b.obd && a.warnings == b.warnings;
}

TrialStore::TrialStore(std::string dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  require(fs::is_directory(dir_), ErrorCode::kIo, "cannot use data directory " + dir_, "data");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& p : files) {
    const std::string id = p.stem().string();
    try {
      auto [state, engine] = replay_with_engine(p.string());
      auto trial = std::make_shared<Trial>();
      trial->state = std::move(state);
      trial->engine = std::move(engine);
      trials_[id] = std::move(trial);
    } catch (const Error& e) {
      broken_[id] = e.what();
    }
  }
}

std::string TrialStore::log_path(const std::string& id) const {
  return (fs::path(dir_) / (id + ".jsonl")).string();
}

std::shared_ptr<TrialStore::Trial> TrialStore::find(const std::string& id) const {
  check_id(id);
  std::shared_lock lock(map_mutex_);
  if (auto it = broken_.find(id); it != broken_.end()) {
    throw Error(ErrorCode::kCorruptLog, it->second, "id");
  }
  auto it = trials_.find(id);
  require(it != trials_.end(), ErrorCode::kNotFound, "no trial with id '" + id + "'", "id");
  return it->second;
}

TrialState TrialStore::create_trial(const std::string& id, const Boin12Config& cfg,
                                    int num_doses, int start_dose) {
  check_id(id);
  require(num_doses >= 1 && num_doses <= 50, ErrorCode::kValidation,
          "num_doses must lie in 1..50", "num_doses");
  require(start_dose >= 0 && start_dose < num_doses, ErrorCode::kValidation,
          "starting dose outside the dose grid", "start_dose");
  // Normalize through the file format so the live state and any replay
  // start from the very same configuration.
  const Boin12Config snapshot = boin12_from_json(to_json(cfg));
  auto trial = std::make_shared<Trial>();
  trial->engine = std::make_unique<Boin12Engine>(Boin12Engine::create(snapshot));
  trial->state = initial_state(id, *trial->engine, snapshot, num_doses, start_dose, utc_now());

  std::unique_lock lock(map_mutex_);
  require(!trials_.contains(id) && !broken_.contains(id), ErrorCode::kConflict,
          "trial '" + id + "' already exists", "id");
  append_line(log_path(id), header_line(trial->state).dump(), true);
  trials_[id] = trial;
  return trial->state;
}

Decision TrialStore::record_cohort(const std::string& id, CohortEvent event) {
  auto trial = find(id);
  std::lock_guard write(trial->write);
  TrialState& live = trial->state;
  if (!event.event_key.empty()) {
    for (const TrialEntry& e : live.log) {
      if (e.event.event_key == event.event_key) return e.decision;
    }
  }
  if (event.timestamp.empty()) event.timestamp = utc_now();
  TrialState next = live;
  apply_cohort(next, *trial->engine, event);
  const int seq = static_cast<int>(next.log.size());
  append_line(log_path(id), cohort_line(next.log.back(), seq, next.config).dump(), false);
  live = std::move(next);
  return live.log.back().decision;
}

FinalReport TrialStore::close_trial(const std::string& id, bool force) {
  auto trial = find(id);
  {
    std::lock_guard write(trial->write);
    TrialState next = trial->state;
    require(next.status != TrialStatus::kClosed, ErrorCode::kWrongStatus,
            "trial '" + id + "' is already closed", "status");
    require(next.status == TrialStatus::kTerminated || force, ErrorCode::kWrongStatus,
            "trial '" + id + "' is still enrolling; force the close to report an interim result",
            "status");
    next.closed_interim = next.status == TrialStatus::kEnrolling;
    next.obd = final_obd(next, *trial->engine);
    next.status = TrialStatus::kClosed;
    const Json line{{"type", "close"},
                    {"seq", static_cast<int>(next.log.size()) + 1},
                    {"timestamp", utc_now()},
                    {"forced", force},
                    {"obd", next.obd ? Json(*next.obd + 1) : Json(nullptr)}};
    append_line(log_path(id), line.dump(), false);
    trial->state = std::move(next);
  }
  const TrialState closed = get(id);
  return {id, closed.obd, closed.closed_interim, audit(id)};
}

TrialState TrialStore::get(const std::string& id) const {
  auto trial = find(id);
  std::lock_guard read(trial->write);
  return trial->state;
}

std::vector<std::string> TrialStore::ids() const {
  std::shared_lock lock(map_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, trial] : trials_) out.push_back(id);
  return out;
}

Json TrialStore::audit(const std::string& id) const {
  const TrialState s = get(id);
  std::ifstream in(log_path(id), std::ios::binary);
  Json lines = Json::array();
  for (std::string line; std::getline(in, line);) lines.push_back(Json::parse(line));
  return {{"id", s.id},
          {"format", "doseopt-trial"},
          {"version", kTrialLogVersion},
          {"config", to_json(s.config)},
          {"log", lines},
          {"state", state_json(s)}};
}

TrialState TrialStore::replay(const std::string& id) const {
  find(id);
  return replay_log(log_path(id));
}

}  // namespace doseopt
