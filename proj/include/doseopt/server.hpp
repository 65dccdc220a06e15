#pragma once

// Versioned HTTP service (/v1) over the shared handlers. Simulations run as
// asynchronous jobs on a bounded worker pool and are polled by id.

#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "doseopt/api.hpp"
#include "doseopt/conduct.hpp"

namespace httplib {
class Server;
}

namespace doseopt {

struct ServerOptions {
  std::string data_dir = "trials";
  std::string token;  // empty disables bearer authentication
  int sim_workers = 2;
  int max_queued_jobs = 64;
};

class SimulationJobs {
 public:
  SimulationJobs(int workers, int max_queued);
  ~SimulationJobs();
  SimulationJobs(const SimulationJobs&) = delete;
  SimulationJobs& operator=(const SimulationJobs&) = delete;

  // Validates the configuration up front; returns the job id.
  std::string submit(const Json& sim_config);
  Json status(const std::string& id) const;

 private:
  struct Job {
    std::string status = "queued";
    Json config;
    Json result;
    Json error;
  };
  void work();

  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<std::string> queue_;
  std::map<std::string, Job> jobs_;
  int next_id_ = 1;
  int max_queued_;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();

  // Binds and serves until stop(); port 0 picks a free port.
  void listen(const std::string& host, int port);
  int bind(const std::string& host, int port);
  void serve();
  void stop();
  bool running() const;

 private:
  void routes();

  ServerOptions options_;
  TrialStore store_;
  SimulationJobs jobs_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace doseopt
