#include "doseopt/server.hpp"

#include <httplib.h>

#include "doseopt/error.hpp"

namespace doseopt {

SimulationJobs::SimulationJobs(int workers, int max_queued) : max_queued_(max_queued) {
  for (int i = 0; i < std::max(1, workers); ++i) workers_.emplace_back([this] { work(); });
}

SimulationJobs::~SimulationJobs() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  ready_.notify_all();
  for (std::thread& t : workers_) t.join();
}

std::string SimulationJobs::submit(const Json& sim_config) {
  sim_config_from_json(sim_config);  // reject bad input before queueing
  std::lock_guard lock(mutex_);
  require(static_cast<int>(queue_.size()) < max_queued_, ErrorCode::kConflict,
          "simulation queue is full; retry later", "body");
  const std::string id = "sim-" + std::to_string(next_id_++);
  jobs_[id].config = sim_config;
  queue_.push_back(id);
  ready_.notify_one();
  return id;
}

Json SimulationJobs::status(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(id);
  require(it != jobs_.end(), ErrorCode::kNotFound, "no simulation job '" + id + "'", "id");
  Json out{{"id", id}, {"status", it->second.status}};
  if (it->second.status == "done") out["result"] = it->second.result;
  if (it->second.status == "failed") out["error"] = it->second.error;
  return out;
}

void SimulationJobs::work() {
  for (;;) {
    std::string id;
    Json config;
    {
      std::unique_lock lock(mutex_);
      ready_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
      jobs_[id].status = "running";
      config = jobs_[id].config;
    }
    Json result, error;
    try {
      result = api_simulate(config);
    } catch (const std::exception& e) {
      error = to_json(to_api_error(e)).at("error");
    }
    std::lock_guard lock(mutex_);
    Job& job = jobs_[id];
    job.status = error.is_null() ? "done" : "failed";
    job.result = std::move(result);
    job.error = std::move(error);
  }
}

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, const std::exception& e) {
  const ApiError err = to_api_error(e);
  send_json(res, err.status, to_json(err));
}

double query_number(const httplib::Request& req, const char* key) {
  const std::string text = req.get_param_value(key);
  size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used > 0 && used == text.size(), ErrorCode::kValidation,
          "'" + text + "' is not a number", key);
  return value;
}

Json body_json(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  return Json::parse(req.body);
}

// Wraps a handler so every failure becomes a structured error response.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const std::exception& e) {
      send_error(res, e);
    }
  };
}

}  // namespace

Server::Server(ServerOptions options)
    : options_(std::move(options)),
      store_(options_.data_dir),
      jobs_(options_.sim_workers, options_.max_queued_jobs),
      http_(std::make_unique<httplib::Server>()) {
  routes();
}

Server::~Server() { stop(); }

void Server::routes() {
  httplib::Server& s = *http_;
  const std::string token = options_.token;
  s.set_pre_routing_handler([token](const httplib::Request& req, httplib::Response& res) {
    if (token.empty() || req.path == "/v1/health") return httplib::Server::HandlerResponse::Unhandled;
    if (req.get_header_value("Authorization") == "Bearer " + token) {
      return httplib::Server::HandlerResponse::Unhandled;
    }
    send_json(res, 401, to_json(ApiError{"unauthorized", "missing or wrong bearer token", "", 401}));
    return httplib::Server::HandlerResponse::Handled;
  });

  s.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  });

  s.Get("/v1/designs/boin12/boundaries", guarded([](const httplib::Request& req, auto& res) {
          require(req.has_param("target"), ErrorCode::kValidation, "missing query parameter",
                  "target");
          send_json(res, 200, api_boundaries(query_number(req, "target")));
        }));

  auto table = [](const httplib::Request& req, httplib::Response& res, const Json& config) {
    std::vector<int> ns;
    if (req.has_param("n_max")) {
      const double n_max = query_number(req, "n_max");
      require(n_max >= 0 && n_max <= 200 && n_max == static_cast<int>(n_max),
              ErrorCode::kValidation, "n_max must be an integer in 0..200", "n_max");
      for (int n = 0; n <= n_max; ++n) ns.push_back(n);
    }
    res.status = 200;
    res.set_content(api_rds_table_csv(config, ns), "text/csv");
  };
  s.Get("/v1/designs/boin12/table", guarded([table](const httplib::Request& req, auto& res) {
          Json config = Json::object();
          if (req.has_param("source")) config["table_source"] = req.get_param_value("source");
          table(req, res, config);
        }));
  s.Post("/v1/designs/boin12/table", guarded([table](const httplib::Request& req, auto& res) {
           table(req, res, body_json(req));
         }));

  s.Post("/v1/designs/merit/search", guarded([](const httplib::Request& req, auto& res) {
           send_json(res, 200, api_merit_search(body_json(req)));
         }));
  s.Get("/v1/designs/merit/variants", guarded([](const httplib::Request&, auto& res) {
          send_json(res, 200, api_merit_variants());
        }));

  s.Post("/v1/trials", guarded([this](const httplib::Request& req, auto& res) {
           send_json(res, 201, api_create_trial(store_, body_json(req)));
         }));
  s.Get("/v1/trials", guarded([this](const httplib::Request&, auto& res) {
          send_json(res, 200, {{"trials", store_.ids()}});
        }));
  s.Get(R"(/v1/trials/([A-Za-z0-9_-]+))", guarded([this](const httplib::Request& req, auto& res) {
          send_json(res, 200, api_get_trial(store_, req.matches[1]));
        }));
  s.Post(R"(/v1/trials/([A-Za-z0-9_-]+)/cohorts)",
         guarded([this](const httplib::Request& req, auto& res) {
           send_json(res, 200, api_record_cohort(store_, req.matches[1], body_json(req)));
         }));
  s.Post(R"(/v1/trials/([A-Za-z0-9_-]+)/close)",
         guarded([this](const httplib::Request& req, auto& res) {
           send_json(res, 200, api_close_trial(store_, req.matches[1], body_json(req)));
         }));
  s.Get(R"(/v1/trials/([A-Za-z0-9_-]+)/audit)",
        guarded([this](const httplib::Request& req, auto& res) {
          send_json(res, 200, api_audit(store_, req.matches[1]));
        }));

  s.Post("/v1/simulations", guarded([this](const httplib::Request& req, auto& res) {
           const std::string id = jobs_.submit(body_json(req));
           send_json(res, 202, {{"id", id}, {"status", "queued"}});
         }));
  s.Get(R"(/v1/simulations/([A-Za-z0-9_-]+))",
        guarded([this](const httplib::Request& req, auto& res) {
          send_json(res, 200, jobs_.status(req.matches[1]));
        }));
}

int Server::bind(const std::string& host, int port) {
  if (port == 0) return http_->bind_to_any_port(host);
  require(http_->bind_to_port(host, port), ErrorCode::kIo,
          "cannot bind " + host + ":" + std::to_string(port), "addr");
  return port;
}

void Server::serve() { http_->listen_after_bind(); }

void Server::listen(const std::string& host, int port) {
  bind(host, port);
  serve();
}

void Server::stop() {
  if (http_) http_->stop();
}

bool Server::running() const { return http_ && http_->is_running(); }

}  // namespace doseopt
