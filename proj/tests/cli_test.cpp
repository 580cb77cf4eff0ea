// SPDX-License-Identifier: Apache-2.0
//
// Drives the installed binary end to end through a scratch directory.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sliceopt/remote.hpp"

namespace {

using nlohmann::json;

std::string g_dir;

std::string scratch_dir() {
  if (g_dir.empty()) {
    char tmpl[] = "/tmp/sliceopt-cli-XXXXXX";
    REQUIRE(mkdtemp(tmpl) != nullptr);
    g_dir = tmpl;
  }
  return g_dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(SLICEOPT_CLI_BIN) + " " + args + " >" + scratch_dir() +
                          "/stdout.txt 2>" + scratch_dir() + "/stderr.txt";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json slurp_json(const std::string& path) { return json::parse(slurp(path)); }

}  // namespace

TEST_CASE("help is available for every subcommand") {
  CHECK(run("--help") == 0);
  for (const std::string sub : {"gen", "solve", "verify", "report", "model", "bench", "serve"})
    CHECK(run(sub + " --help") == 0);
  CHECK(run("frobnicate") == 2);  // unknown subcommand is an input error
}

TEST_CASE("gen writes the documented instance and is byte-deterministic") {
  const std::string dir = scratch_dir();
  const std::string flags =
      "gen --gnbs 4 --rbs 9,12,11,10 --users 8,7,6,7 --seed 1 --out " + dir + "/ref.json";
  CHECK(run(flags) == 0);
  const json sc = slurp_json(dir + "/ref.json");
  CHECK(sc.at("gnbs").size() == 4);
  CHECK(sc.at("users").size() == 28);
  size_t rbs = 0;
  for (const auto& g : sc.at("gnbs")) rbs += g.at("rb_ids").size();
  CHECK(rbs == 42);

  const std::string first = slurp(dir + "/ref.json");
  CHECK(run("gen --gnbs 4 --rbs 9,12,11,10 --users 8,7,6,7 --seed 1 --out " + dir +
            "/ref2.json") == 0);
  CHECK(slurp(dir + "/ref2.json") == first);

  CHECK(run("gen --gnbs 4 --rbs 9,12,11,10 --users 8,7,6,7 --seed 2 --out " + dir +
            "/ref3.json") == 0);
  CHECK(slurp(dir + "/ref3.json") != first);
}

TEST_CASE("gen accepts an empty user list and rejects bad geometry") {
  const std::string dir = scratch_dir();
  CHECK(run("gen --gnbs 1 --rbs 5 --users 0 --out " + dir + "/empty.json") == 0);
  CHECK(slurp_json(dir + "/empty.json").at("users").empty());

  CHECK(run("gen --gnbs 1 --rbs 5 --users 2 --radius 800 --out " + dir + "/bad.json") == 2);
  CHECK(run("gen --gnbs 2 --rbs 5,5,5 --users 2 --out " + dir + "/bad.json") == 2);
}

TEST_CASE("solve writes a verified solution and round-trips through verify") {
  const std::string dir = scratch_dir();
  REQUIRE(run("gen --gnbs 1 --rbs 8 --users 2 --kmax 3 --seed 3 --out " + dir + "/small.json") ==
          0);

  CHECK(run("solve --scenario " + dir + "/small.json --solver greedy --out " + dir +
            "/sol-greedy.json") == 0);
  const json sol = slurp_json(dir + "/sol-greedy.json");
  CHECK(sol.at("solver") == "greedy");
  CHECK(sol.at("verification").at("feasible") == true);
  CHECK(sol.at("objective_bps").get<double>() > 0.0);

  CHECK(run("verify --scenario " + dir + "/small.json --solution " + dir + "/sol-greedy.json") ==
        0);
  CHECK(run("report --solution " + dir + "/sol-greedy.json --full") == 0);

  CHECK(run("solve --scenario " + dir + "/small.json --solver exact --out " + dir +
            "/sol-exact.json") == 0);
  const json exact = slurp_json(dir + "/sol-exact.json");
  CHECK(exact.at("status") == "optimal");
  CHECK(exact.at("objective_bps").get<double>() >= sol.at("objective_bps").get<double>());

  CHECK(run("solve --scenario " + dir + "/small.json --solver sa --seed 4 --reads 6 --sweeps 500"
            " --out " + dir + "/sol-sa.json") == 0);
  const json sa = slurp_json(dir + "/sol-sa.json");
  CHECK(sa.at("verification").at("feasible") == true);
}

TEST_CASE("infeasible outcomes exit 1, unreadable input exits 2") {
  const std::string dir = scratch_dir();
  // More users than RBs: someone always misses their QoS floor.
  REQUIRE(run("gen --gnbs 1 --rbs 3 --users 5 --kmax 2 --seed 5 --out " + dir + "/tight.json") ==
          0);
  CHECK(run("solve --scenario " + dir + "/tight.json --solver greedy --out " + dir +
            "/tight-sol.json") == 1);
  const json sol = slurp_json(dir + "/tight-sol.json");
  CHECK(sol.at("verification").at("feasible") == false);

  CHECK(run("solve --scenario " + dir + "/does-not-exist.json --solver greedy") == 2);
  CHECK(run("verify --scenario " + dir + "/does-not-exist.json --solution " + dir +
            "/tight-sol.json") == 2);
}

TEST_CASE("bench emits one record per (instance, solver, trial)") {
  const std::string dir = scratch_dir();
  CHECK(run("bench --sizes 1:4:2,1:6:3 --solvers greedy,exact --trials 2 --seed 9 --csv " + dir +
            "/bench.csv") == 0);
  std::ifstream in(dir + "/bench.csv");
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "instance_id,n_gnbs,n_rbs,n_users,n_vars,solver,seed,wall_ms,objective_bps,feasible,gap_pct");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2 * 2 * 2);
}

TEST_CASE("single tiny bench instance yields exactly one row") {
  const std::string dir = scratch_dir();
  CHECK(run("bench --sizes 1:2:1 --solvers greedy --trials 1 --seed 1 --csv " + dir +
            "/bench1.csv") == 0);
  std::ifstream in(dir + "/bench1.csv");
  std::string line;
  int rows = -1;  // discount header
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 1);
}

TEST_CASE("single-radio capacity preset runs") {
  const std::string dir = scratch_dir();
  CHECK(run("bench --preset oru550 --solvers greedy --trials 1 --seed 2 --csv " + dir +
            "/oru.csv") == 0);
  std::ifstream in(dir + "/oru.csv");
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  size_t max_vars = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    // n_vars is the 5th column
    size_t pos = 0;
    for (int c = 0; c < 4; ++c) pos = line.find(',', pos) + 1;
    max_vars = std::max(max_vars, static_cast<size_t>(std::stoul(line.substr(pos))));
  }
  CHECK(rows == 4);
  CHECK(max_vars == 550u * 16u);  // past the desk-scale comfort zone
}

TEST_CASE("model dump emits wire json and qubo coefficients") {
  const std::string dir = scratch_dir();
  REQUIRE(run("gen --gnbs 2 --rbs 3,2 --users 2,2 --seed 8 --out " + dir + "/m.json") == 0);
  CHECK(run("model --scenario " + dir + "/m.json --out " + dir + "/model.json --qubo " + dir +
            "/q.txt") == 0);
  const json mj = slurp_json(dir + "/model.json");
  CHECK(mj.at("variables").size() == 20);
  CHECK(mj.at("constraints").size() > 0);
  std::ifstream q(dir + "/q.txt");
  std::string l1;
  std::getline(q, l1);
  CHECK(l1.rfind("# num_bits", 0) == 0);
}

TEST_CASE("remote solver round-trips through a live sampler endpoint") {
  const std::string dir = scratch_dir();
  REQUIRE(run("gen --gnbs 1 --rbs 6 --users 3 --seed 12 --out " + dir + "/r.json") == 0);

  sliceopt::LoopbackServer server;
  const int port = server.start();
  const std::string endpoint = "http://127.0.0.1:" + std::to_string(port);
  CHECK(run("solve --scenario " + dir + "/r.json --solver remote --endpoint " + endpoint +
            " --seed 3 --out " + dir + "/rsol.json") == 0);
  server.stop();

  const json sol = slurp_json(dir + "/rsol.json");
  CHECK(sol.at("solver") == "remote");
  CHECK(sol.at("verification").at("feasible") == true);
}
