// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <thread>
#include <variant>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "oracles.hpp"
#include "sliceopt/remote.hpp"
#include "sliceopt/verify.hpp"

using namespace sliceopt;

namespace {

ConstrainedModel small_model(uint64_t seed) {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = {4, 3};
  cfg.users_per_gnb = {2, 2};
  cfg.k_max = 2;
  return build_model(generate_scenario(cfg, seed));
}

}  // namespace

TEST_SUITE_BEGIN("remote");

TEST_CASE("loopback round trip equals direct annealing") {
  LoopbackServer::Options opts;
  opts.reads = 4;
  opts.sweeps = 400;
  LoopbackServer server(opts);
  server.start();
  RemoteClient client(server.endpoint());

  const ConstrainedModel model = small_model(31);
  RemoteParams params;
  params.seed = 123;

  const std::string job = client.submit(model, params);
  CHECK(!job.empty());
  const Solution remote_sol = client.wait(model, job);

  PenaltyConfig cfg;
  cfg.rate_quantum_bps = opts.rate_quantum_bps;
  const QuboModel qubo = to_qubo(model, cfg);
  const Solution direct = solve_sa(qubo, loopback_schedule(qubo, params.seed, opts));

  CHECK(remote_sol.x == direct.x);
  CHECK(remote_sol.objective_bps == doctest::Approx(direct.objective_bps).epsilon(1e-12));
  CHECK(remote_sol.wall_s >= 0.0);

  server.stop();
}

TEST_CASE("unknown job id raises not-found") {
  LoopbackServer server;
  server.start();
  RemoteClient client(server.endpoint());
  const ConstrainedModel model = small_model(3);
  CHECK_THROWS_AS(client.poll(model, "job-does-not-exist"), NotFoundError);
  server.stop();
}

TEST_CASE("unreachable endpoint raises a transport error") {
  RemoteClient client("http://127.0.0.1:1");  // nothing listens there
  const ConstrainedModel model = small_model(4);
  CHECK_THROWS_AS(client.submit(model, {}), TransportError);
  CHECK_THROWS_AS(client.poll(model, "job-1"), TransportError);
}

TEST_CASE("malformed submission is reported as a failed job") {
  LoopbackServer server;
  server.start();
  RemoteClient client(server.endpoint());

  // A model whose constraints reference a missing variable index dies inside
  // the sampler; the job must end up failed and poll must raise a protocol
  // error rather than hang.
  httplib::Client raw(server.endpoint());
  auto res = raw.Post("/v1/jobs", R"({"model": {"variables": [], "objective": [],
      "constraints": [{"family": "C1", "terms": [[5, 1.0]], "sense": "<=", "rhs": 1.0}]},
      "params": {"seed": 0, "time_limit_s": 0}})",
                      "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const std::string job = nlohmann::json::parse(res->body).at("job_id").get<std::string>();

  const ConstrainedModel model = small_model(5);
  bool failed = false;
  for (int i = 0; i < 200 && !failed; ++i) {
    try {
      auto state = client.poll(model, job);
      if (std::holds_alternative<Pending>(state)) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
        continue;
      }
      break;
    } catch (const ProtocolError&) {
      failed = true;
    }
  }
  CHECK(failed);
  server.stop();
}

TEST_CASE("non-json body is a 400") {
  LoopbackServer server;
  server.start();
  httplib::Client raw(server.endpoint());
  auto res = raw.Post("/v1/jobs", "this is not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  server.stop();
}

TEST_CASE("reference-scale model round-trips through the sampler and verifies") {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = {9, 12, 11, 10};
  cfg.users_per_gnb = {8, 7, 6, 7};
  const Scenario sc = generate_scenario(cfg, 1);
  const ConstrainedModel model = build_model(sc);
  REQUIRE(model.variables.size() == 1176);

  LoopbackServer server;
  server.start();
  RemoteClient client(server.endpoint());
  RemoteParams params;
  params.seed = 7;
  const std::string job = client.submit(model, params);
  const Solution sol = client.wait(model, job);
  server.stop();

  const VerificationReport report = verify_allocation(sol.allocation, sc);
  CHECK(report.feasible);
  CHECK(sol.objective_bps > 0.0);
}

TEST_SUITE_END();
