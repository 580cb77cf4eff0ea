// SPDX-License-Identifier: Apache-2.0
#include "sliceopt/remote.hpp"

#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

namespace sliceopt {

namespace {

using nlohmann::json;

json params_to_json(const RemoteParams& p) {
  return {{"time_limit_s", p.time_limit_s}, {"seed", p.seed}};
}

}  // namespace

AnnealSchedule loopback_schedule(const QuboModel& qubo, uint64_t seed,
                                 const LoopbackServer::Options& options) {
  return default_schedule(qubo, seed, options.reads, options.sweeps);
}

// ---------------------------------------------------------------------------
// Client

RemoteClient::RemoteClient(std::string endpoint) : endpoint_(std::move(endpoint)) {}

std::string RemoteClient::submit(const ConstrainedModel& model, const RemoteParams& params) {
  httplib::Client cli(endpoint_);
  cli.set_connection_timeout(5, 0);
  cli.set_read_timeout(60, 0);

  json body;
  body["model"] = model_to_json(model);
  body["params"] = params_to_json(params);

  auto res = cli.Post("/v1/jobs", body.dump(), "application/json");
  if (!res) throw TransportError("submit: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw ProtocolError("submit: HTTP " + std::to_string(res->status) + ": " + res->body);
  try {
    return json::parse(res->body).at("job_id").get<std::string>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("submit: malformed response: ") + e.what());
  }
}

std::variant<Pending, Solution> RemoteClient::poll(const ConstrainedModel& model,
                                                   const std::string& job_id) {
  httplib::Client cli(endpoint_);
  cli.set_connection_timeout(5, 0);
  cli.set_read_timeout(60, 0);

  auto res = cli.Get("/v1/jobs/" + job_id);
  if (!res) throw TransportError("poll: " + httplib::to_string(res.error()));
  if (res->status == 404) throw NotFoundError("poll: unknown job id " + job_id);
  if (res->status != 200)
    throw ProtocolError("poll: HTTP " + std::to_string(res->status) + ": " + res->body);

  json j;
  try {
    j = json::parse(res->body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("poll: malformed response: ") + e.what());
  }
  const std::string status = j.value("status", "");
  if (status == "queued" || status == "running") return Pending{status};
  if (status == "failed")
    throw ProtocolError("poll: job failed: " + j.value("error", std::string("unknown error")));
  if (status != "done") throw ProtocolError("poll: unexpected status '" + status + "'");

  try {
    const json& sj = j.at("solution");
    const auto bits = sj.at("bits").get<std::vector<int>>();
    if (bits.size() != model.variables.size())
      throw ProtocolError("poll: solution length does not match the model");
    Solution sol;
    sol.solver = "remote";
    sol.x.resize(bits.size());
    for (size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] != 0 && bits[i] != 1) throw ProtocolError("poll: non-binary bit in solution");
      sol.x[i] = static_cast<uint8_t>(bits[i]);
    }
    sol.allocation = model.to_allocation(sol.x);
    sol.objective_bps = model.objective_value(sol.x);
    sol.wall_s = sj.at("wall_time_s").get<double>();
    sol.status = model.feasible(sol.x) ? SolveStatus::Feasible : SolveStatus::Unknown;
    return sol;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("poll: malformed solution: ") + e.what());
  }
}

Solution RemoteClient::wait(const ConstrainedModel& model, const std::string& job_id,
                            double poll_interval_s, double timeout_s) {
  const auto t0 = std::chrono::steady_clock::now();
  for (;;) {
    auto state = poll(model, job_id);
    if (std::holds_alternative<Solution>(state)) return std::get<Solution>(state);
    const double waited = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (waited > timeout_s) throw TransportError("wait: timed out after " + std::to_string(waited) + " s");
    std::this_thread::sleep_for(std::chrono::duration<double>(poll_interval_s));
  }
}

// ---------------------------------------------------------------------------
// Loopback server

struct LoopbackServer::Impl {
  Options options;
  httplib::Server svr;
  std::thread listener;
  int bound_port = 0;

  std::mutex mu;
  struct Job {
    std::string status = "queued";  // queued | running | done | failed
    json solution;
    std::string error;
  };
  std::unordered_map<std::string, Job> jobs;
  uint64_t next_id = 1;
  std::vector<std::thread> workers;

  explicit Impl(Options opts) : options(opts) {
    svr.Post("/v1/jobs", [this](const httplib::Request& req, httplib::Response& res) {
      handle_submit(req, res);
    });
    svr.Get(R"(/v1/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      handle_poll(req, res);
    });
  }

  void handle_submit(const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", std::string("bad request: ") + e.what()}}.dump(),
                      "application/json");
      return;
    }

    std::string id;
    {
      std::lock_guard<std::mutex> lock(mu);
      id = "job-" + std::to_string(next_id++);
      jobs[id] = Job{};
    }

    std::thread worker([this, id, body] { run_job(id, body); });
    {
      std::lock_guard<std::mutex> lock(mu);
      workers.push_back(std::move(worker));
    }
    res.set_content(json{{"job_id", id}}.dump(), "application/json");
  }

  void run_job(const std::string& id, const json& body) {
    const auto t0 = std::chrono::steady_clock::now();
    {
      std::lock_guard<std::mutex> lock(mu);
      jobs[id].status = "running";
    }
    try {
      ConstrainedModel model = model_from_json(body.at("model"));
      const uint64_t seed = body.at("params").value("seed", uint64_t{0});

      PenaltyConfig cfg;
      cfg.rate_quantum_bps = options.rate_quantum_bps;
      const QuboModel qubo = to_qubo(model, cfg);
      const Solution sol = solve_sa(qubo, loopback_schedule(qubo, seed, options));

      json bits = json::array();
      for (uint8_t b : sol.x) bits.push_back(static_cast<int>(b));
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::lock_guard<std::mutex> lock(mu);
      jobs[id].solution = {{"bits", std::move(bits)},
                           {"objective", sol.objective_bps},
                           {"wall_time_s", wall}};  // includes queueing
      jobs[id].status = "done";
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(mu);
      jobs[id].status = "failed";
      jobs[id].error = e.what();
    }
  }

  void handle_poll(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    std::lock_guard<std::mutex> lock(mu);
    auto it = jobs.find(id);
    if (it == jobs.end()) {
      res.status = 404;
      res.set_content(json{{"error", "unknown job id"}}.dump(), "application/json");
      return;
    }
    json j{{"status", it->second.status}};
    if (it->second.status == "done") j["solution"] = it->second.solution;
    if (it->second.status == "failed") j["error"] = it->second.error;
    res.set_content(j.dump(), "application/json");
  }
};

LoopbackServer::LoopbackServer() : LoopbackServer(Options{}) {}

LoopbackServer::LoopbackServer(Options options) : impl_(std::make_unique<Impl>(options)) {}

LoopbackServer::~LoopbackServer() { stop(); }

int LoopbackServer::start(int port) {
  if (port == 0) {
    impl_->bound_port = impl_->svr.bind_to_any_port("127.0.0.1");
  } else {
    if (!impl_->svr.bind_to_port("127.0.0.1", port))
      throw std::runtime_error("loopback: cannot bind port " + std::to_string(port));
    impl_->bound_port = port;
  }
  impl_->listener = std::thread([this] { impl_->svr.listen_after_bind(); });
  impl_->svr.wait_until_ready();
  return impl_->bound_port;
}

void LoopbackServer::stop() {
  if (!impl_) return;
  if (impl_->listener.joinable()) {
    impl_->svr.stop();
    impl_->listener.join();
  }
  std::vector<std::thread> workers;
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    workers.swap(impl_->workers);
  }
  for (auto& w : workers)
    if (w.joinable()) w.join();
}

int LoopbackServer::port() const { return impl_->bound_port; }

std::string LoopbackServer::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(impl_->bound_port);
}

}  // namespace sliceopt
