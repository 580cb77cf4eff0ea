// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <variant>

#include "sliceopt/model.hpp"
#include "sliceopt/solvers.hpp"

namespace sliceopt {

// Wire contract (JSON over HTTP):
//   POST /v1/jobs
//     {model: {variables, objective, constraints}, params: {time_limit_s, seed}}
//     -> {job_id}
//   GET /v1/jobs/{id}
//     -> {status: queued|running|done|failed,
//         solution?: {bits, objective, wall_time_s}}

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RemoteParams {
  double time_limit_s = 0.0;  // recorded by the sampler, informational
  uint64_t seed = 0;
};

struct Pending {
  std::string status;  // "queued" or "running"
};

class RemoteClient {
 public:
  // endpoint like "http://127.0.0.1:8931"
  explicit RemoteClient(std::string endpoint);

  // Fire: returns the job id. Transport failures throw TransportError
  // (retryable), malformed responses throw ProtocolError.
  std::string submit(const ConstrainedModel& model, const RemoteParams& params);

  // Poll: Pending until the sampler finishes. Unknown ids throw
  // NotFoundError; a failed job throws ProtocolError. The model is needed to
  // map returned bits back onto variable labels.
  std::variant<Pending, Solution> poll(const ConstrainedModel& model, const std::string& job_id);

  // Convenience poll loop.
  Solution wait(const ConstrainedModel& model, const std::string& job_id,
                double poll_interval_s = 0.02, double timeout_s = 600.0);

 private:
  std::string endpoint_;
};

// In-process sampler implementing the wire contract, backed by the penalty
// lowering plus simulated annealing with the default schedule, so the
// contract is testable without any external service. Deterministic per
// submitted seed.
class LoopbackServer {
 public:
  struct Options {
    int reads = 16;
    int sweeps = 4000;
    double rate_quantum_bps = 1000.0;
  };

  LoopbackServer();
  explicit LoopbackServer(Options options);
  ~LoopbackServer();
  LoopbackServer(const LoopbackServer&) = delete;
  LoopbackServer& operator=(const LoopbackServer&) = delete;

  // Binds 127.0.0.1 and returns the port (an ephemeral one when port == 0).
  int start(int port = 0);
  void stop();
  int port() const;
  std::string endpoint() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Matches the Solution produced by solve_sa for the same model and seed.
AnnealSchedule loopback_schedule(const QuboModel& qubo, uint64_t seed,
                                 const LoopbackServer::Options& options = {});

}  // namespace sliceopt
