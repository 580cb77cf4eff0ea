// SPDX-License-Identifier: Apache-2.0
//
// sliceopt: scenario generation, RB-allocation solving, verification and
// benchmarking for multi-slice RAN instances.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sliceopt/model.hpp"
#include "sliceopt/qubo.hpp"
#include "sliceopt/remote.hpp"
#include "sliceopt/rng.hpp"
#include "sliceopt/scenario.hpp"
#include "sliceopt/solvers.hpp"
#include "sliceopt/verify.hpp"

namespace {

using nlohmann::json;
using namespace sliceopt;

// Exit codes: 0 success/feasible, 1 infeasible result, 2 input or I/O error.
constexpr int kExitFeasible = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitInputError = 2;

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(std::stoi(tok));
  }
  return out;
}

// A list is either per-gNodeB counts ("9,12,11,10") or a single total that is
// split evenly (remainder to the first gNodeBs).
std::vector<int> spread_counts(const std::vector<int>& list, int n_gnbs) {
  if (static_cast<int>(list.size()) == n_gnbs) return list;
  if (list.size() == 1 && n_gnbs > 1) {
    const int total = list[0];
    std::vector<int> out(n_gnbs, total / n_gnbs);
    for (int i = 0; i < total % n_gnbs; ++i) ++out[i];
    return out;
  }
  throw CLI::ValidationError("count list must have one entry or one per gNodeB");
}

json solution_to_json(const Solution& sol, const VerificationReport& report) {
  json j;
  j["version"] = 1;
  j["solver"] = sol.solver;
  j["status"] = to_string(sol.status);
  j["objective_bps"] = sol.objective_bps;
  j["wall_ms"] = sol.wall_s * 1e3;
  j["assignment"] = json::array();
  for (const auto& label : sol.allocation.assigned)
    j["assignment"].push_back({label.rb, label.gnb, label.user});
  json stats;
  if (sol.stats.nodes) stats["nodes"] = sol.stats.nodes;
  if (sol.stats.sweeps) stats["sweeps"] = sol.stats.sweeps;
  if (sol.stats.reads) stats["reads"] = sol.stats.reads;
  j["stats"] = std::move(stats);
  j["verification"] = report_to_json(report);
  return j;
}

Allocation allocation_from_json(const json& j) {
  Allocation alloc;
  for (const auto& e : j.at("assignment"))
    alloc.assigned.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()});
  return alloc;
}

void print_report_summary(const VerificationReport& report, std::ostream& os) {
  os << "constraints:";
  for (const auto& f : report.families)
    os << " " << f.family << "=" << (f.pass ? "pass" : "FAIL(" + std::to_string(f.violations.size()) + ")");
  os << "\n";
  int served = 0;
  int qos_ok = 0;
  for (const auto& u : report.users) {
    if (u.rbs_assigned > 0) ++served;
    if (u.qos_ok) ++qos_ok;
  }
  os << "users: " << report.users.size() << " total, " << served << " served, " << qos_ok
     << " meeting QoS\n";
  for (const auto& g : report.gnbs) {
    os << "  gnb " << g.gnb_id << ": " << g.rbs_used << "/" << g.rbs_total << " RBs used, "
       << g.served_users << " of its users served, " << g.pool_consumers
       << " users on its pool\n";
  }
  os << "feasible: " << (report.feasible ? "yes" : "no") << "\n";
}

// --------------------------------------------------------------------------
// gen

struct GenArgs {
  int gnbs = 1;
  std::string rbs;
  std::string users;
  double urllc_frac = 0.5;
  int kmax = 3;
  uint64_t seed = 0;
  double radius = 300.0;
  double area = 1000.0;
  double freq = 3.7e9;
  double rb_bw = 180.0e3;
  double noise_dbm = -117.0;
  double tx_dbm = 30.0;
  std::string out;
};

int run_gen(const GenArgs& args) {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = spread_counts(parse_int_list(args.rbs), args.gnbs);
  cfg.users_per_gnb = spread_counts(parse_int_list(args.users), args.gnbs);
  cfg.urllc_fraction = args.urllc_frac;
  cfg.k_max = args.kmax;
  cfg.coverage_radius_m = args.radius;
  cfg.area_width_m = cfg.area_height_m = args.area;
  cfg.carrier_freq_hz = args.freq;
  cfg.rb_bandwidth_hz = args.rb_bw;
  cfg.noise_dbm = args.noise_dbm;
  cfg.tx_dbm = args.tx_dbm;

  const Scenario sc = generate_scenario(cfg, args.seed);
  save_scenario(sc, args.out);

  size_t n_rbs = sc.all_rb_ids().size();
  std::cout << "wrote " << args.out << ": " << sc.gnbs.size() << " gNodeBs, " << n_rbs
            << " RBs, " << sc.users.size() << " users, " << n_rbs * sc.users.size()
            << " decision variables\n";
  return kExitFeasible;
}

// --------------------------------------------------------------------------
// solve

struct SolveArgs {
  std::string scenario;
  std::string solver = "sa";
  uint64_t seed = 0;
  double time_limit = 0.0;
  int reads = 8;
  int sweeps = 2000;
  double quantum = 1000.0;
  std::string endpoint;
  std::string out;
};

Solution dispatch_solver(const SolveArgs& args, const ConstrainedModel& model) {
  if (args.solver == "exact") {
    SolveLimits limits;
    limits.max_seconds = args.time_limit;
    return solve_exact(model, limits);
  }
  if (args.solver == "greedy") return solve_greedy(model);
  if (args.solver == "sa") {
    PenaltyConfig cfg;
    cfg.rate_quantum_bps = args.quantum;
    const QuboModel qubo = to_qubo(model, cfg);
    return solve_sa(qubo, default_schedule(qubo, args.seed, args.reads, args.sweeps));
  }
  if (args.solver == "remote") {
    if (args.endpoint.empty()) throw CLI::ValidationError("--endpoint is required for remote");
    RemoteClient client(args.endpoint);
    RemoteParams params;
    params.time_limit_s = args.time_limit;
    params.seed = args.seed;
    const std::string job = client.submit(model, params);
    std::cerr << "submitted " << job << " to " << args.endpoint << "\n";
    return client.wait(model, job);
  }
  throw CLI::ValidationError("unknown solver: " + args.solver);
}

int run_solve(const SolveArgs& args) {
  Scenario sc;
  try {
    sc = load_scenario(args.scenario);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  const ConstrainedModel model = build_model(sc);
  const Solution sol = dispatch_solver(args, model);
  const VerificationReport report = verify_allocation(sol.allocation, sc);

  if (!args.out.empty()) {
    std::ofstream out(args.out);
    if (!out) {
      std::cerr << "error: cannot write " << args.out << "\n";
      return kExitInputError;
    }
    out << solution_to_json(sol, report).dump(2) << "\n";
  }

  std::cout << "solver=" << sol.solver << " status=" << to_string(sol.status)
            << " objective=" << sol.objective_bps << " bps wall=" << sol.wall_s * 1e3 << " ms\n";
  print_report_summary(report, std::cout);
  return report.feasible ? kExitFeasible : kExitInfeasible;
}

// --------------------------------------------------------------------------
// verify / report

int run_verify(const std::string& scenario_path, const std::string& solution_path) {
  Scenario sc;
  json sj;
  try {
    sc = load_scenario(scenario_path);
    std::ifstream in(solution_path);
    if (!in) throw std::runtime_error("cannot open solution: " + solution_path);
    in >> sj;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  const Allocation alloc = allocation_from_json(sj);
  const VerificationReport report = verify_allocation(alloc, sc);
  print_report_summary(report, std::cout);
  return report.feasible ? kExitFeasible : kExitInfeasible;
}

int run_report(const std::string& solution_path, bool full) {
  json sj;
  try {
    std::ifstream in(solution_path);
    if (!in) throw std::runtime_error("cannot open solution: " + solution_path);
    in >> sj;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  std::cout << "solver=" << sj.value("solver", std::string("?"))
            << " status=" << sj.value("status", std::string("?"))
            << " objective=" << sj.value("objective_bps", 0.0)
            << " bps wall=" << sj.value("wall_ms", 0.0) << " ms\n";
  const json& v = sj.at("verification");
  std::cout << "feasible: " << (v.value("feasible", false) ? "yes" : "no") << "\n";
  for (const auto& [name, fam] : v.at("families").items()) {
    std::cout << "  " << name << ": " << (fam.value("pass", false) ? "pass" : "FAIL") << "\n";
    if (full) {
      for (const auto& viol : fam.at("violations"))
        std::cout << "    - " << viol.value("detail", std::string()) << "\n";
    }
  }
  if (full) {
    for (const auto& u : v.at("users")) {
      std::cout << "  user " << u.at("id") << " (" << u.value("slice", std::string()) << "): "
                << u.value("rate_bps", 0.0) << " bps, rbs=" << u.value("rbs", 0)
                << " borrowed=" << u.value("borrowed", 0)
                << (u.value("qos_ok", false) ? " qos=ok" : " qos=VIOLATED") << "\n";
    }
  }
  return kExitFeasible;
}

// --------------------------------------------------------------------------
// model: debug dumps of the optimization problem and its lowering

int run_model(const std::string& scenario_path, const std::string& out,
              const std::string& qubo_out, bool relaxed, double quantum) {
  Scenario sc;
  try {
    sc = load_scenario(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  const ConstrainedModel model = relaxed ? relaxed_knapsack_model(sc) : build_model(sc);
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) {
      std::cerr << "error: cannot write " << out << "\n";
      return kExitInputError;
    }
    os << model_to_json(model).dump(2) << "\n";
  }
  if (!qubo_out.empty()) {
    PenaltyConfig cfg;
    cfg.rate_quantum_bps = quantum;
    const QuboModel qubo = to_qubo(model, cfg);
    std::ofstream os(qubo_out);
    if (!os) {
      std::cerr << "error: cannot write " << qubo_out << "\n";
      return kExitInputError;
    }
    qubo.write_coefficients(os);
  }
  std::cout << model.variables.size() << " variables, " << model.constraints.size()
            << " constraints\n";
  return kExitFeasible;
}

// --------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string sizes;  // "G:K:N,G:K:N,..."
  std::string solvers = "greedy,sa";
  int trials = 3;
  uint64_t seed = 0;
  std::string csv;
  int reads = 4;
  int sweeps = 500;
  double time_limit = 10.0;
  std::string preset;
};

struct BenchSize {
  int gnbs, rbs, users;
};

std::vector<BenchSize> parse_sizes(const std::string& spec) {
  std::vector<BenchSize> sizes;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    BenchSize s{};
    if (sscanf(tok.c_str(), "%d:%d:%d", &s.gnbs, &s.rbs, &s.users) != 3)
      throw CLI::ValidationError("size entry must be G:K:N, got '" + tok + "'");
    sizes.push_back(s);
  }
  return sizes;
}

int run_bench(BenchArgs args) {
  // A single 100 MHz O-RU at 15 kHz subcarrier spacing carries roughly 550
  // physical RBs; this preset sweeps user counts against one such radio to
  // show where the variable count outgrows desk-scale solvers.
  if (args.preset == "oru550") {
    args.sizes = "1:550:4,1:550:8,1:550:12,1:550:16";
    if (args.solvers.empty()) args.solvers = "greedy";
  } else if (!args.preset.empty()) {
    throw CLI::ValidationError("unknown preset: " + args.preset);
  }

  const std::vector<BenchSize> sizes = parse_sizes(args.sizes);
  std::vector<std::string> solvers;
  {
    std::stringstream ss(args.solvers);
    std::string tok;
    while (std::getline(ss, tok, ',')) solvers.push_back(tok);
  }
  if (sizes.empty() || solvers.empty())
    throw CLI::ValidationError("bench needs --sizes and --solvers");

  std::ofstream csv;
  std::ostream* out = &std::cout;
  if (!args.csv.empty()) {
    csv.open(args.csv);
    if (!csv) {
      std::cerr << "error: cannot write " << args.csv << "\n";
      return kExitInputError;
    }
    out = &csv;
  }
  *out << "instance_id,n_gnbs,n_rbs,n_users,n_vars,solver,seed,wall_ms,objective_bps,feasible,gap_pct\n";

  for (size_t i = 0; i < sizes.size(); ++i) {
    const BenchSize& size = sizes[i];
    const uint64_t scenario_seed = sub_seed(args.seed, i);
    ScenarioConfig cfg;
    cfg.rbs_per_gnb = spread_counts({size.rbs}, size.gnbs);
    cfg.users_per_gnb = spread_counts({size.users}, size.gnbs);
    const Scenario sc = generate_scenario(cfg, scenario_seed);
    const ConstrainedModel model = build_model(sc);

    // Exact bound first (when requested) so every solver's rows carry a gap.
    double exact_opt = 0.0;
    bool have_exact = false;
    if (std::find(solvers.begin(), solvers.end(), "exact") != solvers.end()) {
      try {
        SolveLimits limits;
        limits.max_seconds = args.time_limit;
        const Solution bound = solve_exact(model, limits);
        if (bound.status == SolveStatus::Optimal) {
          exact_opt = bound.objective_bps;
          have_exact = true;
        }
      } catch (const std::exception&) {
      }
    }

    for (const std::string& solver : solvers) {
      for (int trial = 0; trial < args.trials; ++trial) {
        const uint64_t solve_seed = sub_seed(scenario_seed, 1000 + trial);
        Solution sol;
        bool solved = true;
        try {
          if (solver == "exact") {
            SolveLimits limits;
            limits.max_seconds = args.time_limit;
            sol = solve_exact(model, limits);
          } else if (solver == "greedy") {
            sol = solve_greedy(model);
          } else if (solver == "sa") {
            const QuboModel qubo = to_qubo(model, {});
            sol = solve_sa(qubo, default_schedule(qubo, solve_seed, args.reads, args.sweeps));
          } else {
            throw CLI::ValidationError("unknown solver: " + solver);
          }
        } catch (const std::exception& e) {
          std::cerr << "solve failed (" << solver << ", instance " << i << "): " << e.what()
                    << "\n";
          solved = false;
        }

        bool feasible = false;
        if (solved) {
          const VerificationReport report = verify_allocation(sol.allocation, sc);
          feasible = report.feasible;
        }

        *out << "i" << i << "," << size.gnbs << "," << size.rbs << "," << size.users << ","
             << static_cast<size_t>(size.rbs) * size.users << "," << solver << "," << solve_seed
             << "," << (solved ? sol.wall_s * 1e3 : 0.0) << ","
             << (solved ? sol.objective_bps : 0.0) << "," << (feasible ? "true" : "false") << ",";
        if (solved && have_exact && exact_opt > 0.0)
          *out << 100.0 * (exact_opt - sol.objective_bps) / exact_opt;
        *out << "\n";
      }
    }
  }
  return kExitFeasible;
}

// --------------------------------------------------------------------------
// serve

int run_serve(int port, int reads, int sweeps) {
  LoopbackServer::Options opts;
  opts.reads = reads;
  opts.sweeps = sweeps;
  LoopbackServer server(opts);
  const int bound = server.start(port);
  std::cout << "sampler listening on http://127.0.0.1:" << bound << " (ctrl-c to stop)\n";
  // Block until interrupted.
  static std::atomic<bool> stop_flag{false};
  std::signal(SIGINT, [](int) { stop_flag = true; });
  std::signal(SIGTERM, [](int) { stop_flag = true; });
  while (!stop_flag) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return kExitFeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RB allocation for multi-slice RAN: generate, solve, verify, bench"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a scenario file");
  gen_cmd->add_option("--gnbs", gen.gnbs, "number of gNodeBs")->default_val(1);
  gen_cmd->add_option("--rbs", gen.rbs, "RBs per gNodeB (csv) or a total")->required();
  gen_cmd->add_option("--users", gen.users, "users per gNodeB (csv) or a total")->required();
  gen_cmd->add_option("--urllc-frac", gen.urllc_frac, "fraction of URLLC users");
  gen_cmd->add_option("--kmax", gen.kmax, "per-user RB cap");
  gen_cmd->add_option("--seed", gen.seed, "generation seed");
  gen_cmd->add_option("--radius", gen.radius, "coverage radius, m");
  gen_cmd->add_option("--area", gen.area, "square area side, m");
  gen_cmd->add_option("--freq", gen.freq, "carrier frequency, Hz");
  gen_cmd->add_option("--rb-bw", gen.rb_bw, "RB bandwidth, Hz");
  gen_cmd->add_option("--noise-dbm", gen.noise_dbm, "AWGN power, dBm");
  gen_cmd->add_option("--tx-dbm", gen.tx_dbm, "per-RB transmit power, dBm");
  gen_cmd->add_option("--out", gen.out, "output scenario path")->required();

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve a scenario and verify the result");
  solve_cmd->add_option("--scenario", solve.scenario, "scenario file")->required();
  solve_cmd->add_option("--solver", solve.solver, "exact|greedy|sa|remote");
  solve_cmd->add_option("--seed", solve.seed, "solver seed");
  solve_cmd->add_option("--time-limit", solve.time_limit, "exact solver wall limit, s");
  solve_cmd->add_option("--reads", solve.reads, "sa restarts");
  solve_cmd->add_option("--sweeps", solve.sweeps, "sa sweeps per restart");
  solve_cmd->add_option("--quantum", solve.quantum, "rate quantization step, bits/s");
  solve_cmd->add_option("--endpoint", solve.endpoint, "remote sampler endpoint");
  solve_cmd->add_option("--out", solve.out, "output solution path");

  std::string verify_scenario, verify_solution;
  CLI::App* verify_cmd = app.add_subcommand("verify", "re-verify a solution file");
  verify_cmd->add_option("--scenario", verify_scenario, "scenario file")->required();
  verify_cmd->add_option("--solution", verify_solution, "solution file")->required();

  std::string report_solution;
  bool report_full = false;
  CLI::App* report_cmd = app.add_subcommand("report", "print a solution's verification report");
  report_cmd->add_option("--solution", report_solution, "solution file")->required();
  report_cmd->add_flag("--full", report_full, "itemize users and violations");

  std::string model_scenario, model_out, model_qubo;
  bool model_relaxed = false;
  double model_quantum = 1000.0;
  CLI::App* model_cmd = app.add_subcommand("model", "dump the optimization problem / lowering");
  model_cmd->add_option("--scenario", model_scenario, "scenario file")->required();
  model_cmd->add_option("--out", model_out, "model dump path (wire-format JSON)");
  model_cmd->add_option("--qubo", model_qubo, "QUBO coefficient list path");
  model_cmd->add_flag("--relaxed", model_relaxed, "emit the knapsack relaxation");
  model_cmd->add_option("--quantum", model_quantum, "rate quantization step, bits/s");

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "sweep instance sizes and emit CSV records");
  bench_cmd->add_option("--sizes", bench.sizes, "instances as G:K:N,...");
  bench_cmd->add_option("--solvers", bench.solvers, "csv of exact|greedy|sa");
  bench_cmd->add_option("--trials", bench.trials, "trials per (instance, solver)");
  bench_cmd->add_option("--seed", bench.seed, "bench seed");
  bench_cmd->add_option("--csv", bench.csv, "output CSV path (stdout when absent)");
  bench_cmd->add_option("--reads", bench.reads, "sa restarts");
  bench_cmd->add_option("--sweeps", bench.sweeps, "sa sweeps per restart");
  bench_cmd->add_option("--time-limit", bench.time_limit, "exact solver wall limit, s");
  bench_cmd->add_option("--preset", bench.preset, "named preset (oru550)");

  int serve_port = 0, serve_reads = 8, serve_sweeps = 2000;
  CLI::App* serve_cmd = app.add_subcommand("serve", "run the annealing sampler over HTTP");
  serve_cmd->add_option("--port", serve_port, "port (0 picks an ephemeral one)");
  serve_cmd->add_option("--reads", serve_reads, "sa restarts per job");
  serve_cmd->add_option("--sweeps", serve_sweeps, "sa sweeps per restart");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints help/error
    return e.get_exit_code() == 0 ? 0 : kExitInputError;
  }

  try {
    if (gen_cmd->parsed()) return run_gen(gen);
    if (solve_cmd->parsed()) return run_solve(solve);
    if (verify_cmd->parsed()) return run_verify(verify_scenario, verify_solution);
    if (report_cmd->parsed()) return run_report(report_solution, report_full);
    if (model_cmd->parsed())
      return run_model(model_scenario, model_out, model_qubo, model_relaxed, model_quantum);
    if (bench_cmd->parsed()) return run_bench(bench);
    if (serve_cmd->parsed()) return run_serve(serve_port, serve_reads, serve_sweeps);
  } catch (const TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
