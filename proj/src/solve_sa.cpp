// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "sliceopt/rng.hpp"
#include "sliceopt/solvers.hpp"

namespace sliceopt {

namespace {

using Clock = std::chrono::steady_clock;

// Compressed adjacency of the quadratic terms, symmetric view.
struct Adjacency {
  std::vector<double> diag;
  std::vector<int> offsets;  // size num_bits + 1
  std::vector<std::pair<int, double>> edges;

  explicit Adjacency(const QuboModel& q) {
    const int n = q.num_bits;
    diag.assign(n, 0.0);
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (const auto& [key, v] : q.coeffs) {
      const int i = static_cast<int>(key >> 32);
      const int j = static_cast<int>(key & 0xffffffffu);
      if (i == j) {
        diag[i] += v;
      } else {
        adj[i].push_back({j, v});
        adj[j].push_back({i, v});
      }
    }
    offsets.resize(n + 1);
    offsets[0] = 0;
    for (int i = 0; i < n; ++i) {
      std::sort(adj[i].begin(), adj[i].end());
      offsets[i + 1] = offsets[i] + static_cast<int>(adj[i].size());
    }
    edges.reserve(offsets[n]);
    for (int i = 0; i < n; ++i) edges.insert(edges.end(), adj[i].begin(), adj[i].end());
  }

  double energy(const QuboModel& q, const std::vector<uint8_t>& bits) const {
    double e = 0.0;
    for (int i = 0; i < q.num_bits; ++i) {
      if (!bits[i]) continue;
      e += diag[i];
      for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
        const auto& [j, w] = edges[k];
        if (j > i && bits[j]) e += w;
      }
    }
    return e;
  }
};

struct RestartRun {
  const QuboModel& qubo;
  const Adjacency& adj;
  const AnnealSchedule& schedule;

  const std::vector<uint8_t>& initial_bits;

  detail::RestartResult run(uint64_t restart_index, std::vector<double>* trace) const {
    const int n = qubo.num_bits;
    Rng rng(sub_seed(schedule.seed, restart_index));

    // Every restart climbs from the empty assignment (consistent slack):
    // packing builds up through small ridges, instead of having to unwind a
    // random state's pile of coupled violations. Restarts differ through
    // their Metropolis streams.
    std::vector<uint8_t> bits = initial_bits;

    // Local fields: h[i] = diag[i] + sum_j w_ij x_j; flipping bit i changes
    // the energy by +h[i] (0 -> 1) or -h[i] (1 -> 0).
    std::vector<double> h(n, 0.0);
    for (int i = 0; i < n; ++i) {
      h[i] = adj.diag[i];
      for (int k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) {
        const auto& [j, w] = adj.edges[k];
        if (bits[j]) h[i] += w;
      }
    }
    double energy = adj.energy(qubo, bits);

    std::vector<uint8_t> best_bits = bits;
    double best_energy = energy;
    uint64_t sweeps_done = 0;

    const double t0 = schedule.initial_temperature;
    const double t1 = schedule.final_temperature;
    const double ratio =
        schedule.sweeps > 1 ? std::pow(t1 / t0, 1.0 / (schedule.sweeps - 1)) : 1.0;

    auto flip = [&](int i, double delta) {
      bits[i] ^= 1;
      energy += delta;
      const double sign = bits[i] ? 1.0 : -1.0;
      for (int k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) {
        const auto& [j, w] = adj.edges[k];
        h[j] += sign * w;
      }
    };

    double temp = t0;
    for (int s = 0; s < schedule.sweeps; ++s, temp *= ratio) {
      const double inv_t = 1.0 / temp;
      for (int i = 0; i < n; ++i) {
        const double delta = bits[i] ? -h[i] : h[i];
        if (delta <= 0.0 || rng.uniform01() < std::exp(-delta * inv_t)) flip(i, delta);
      }
      ++sweeps_done;
      if (energy < best_energy) {
        best_energy = energy;
        best_bits = bits;
      }
      if (trace) trace->push_back(best_energy);
    }

    // Zero-temperature descent to the nearest local minimum; this settles the
    // slack registers exactly onto their constraints.
    for (int pass = 0; pass < 200; ++pass) {
      bool improved = false;
      for (int i = 0; i < n; ++i) {
        const double delta = bits[i] ? -h[i] : h[i];
        if (delta < 0.0) {
          flip(i, delta);
          improved = true;
        }
      }
      ++sweeps_done;
      if (trace) trace->push_back(std::min(best_energy, energy));
      if (!improved) break;
    }
    if (energy < best_energy) {
      best_energy = energy;
      best_bits = bits;
    }

    // Running energy accumulates float drift over many flips; re-evaluate the
    // winner exactly so cross-restart comparison is drift-free.
    best_energy = adj.energy(qubo, best_bits);
    return {std::move(best_bits), best_energy, sweeps_done};
  }
};

}  // namespace

namespace detail {

RestartResult anneal_restart(const QuboModel& qubo, const AnnealSchedule& schedule,
                             uint64_t restart_index, std::vector<double>* best_energy_trace) {
  Adjacency adj(qubo);
  const std::vector<uint8_t> zeros(qubo.num_decision, 0);
  const std::vector<uint8_t> init = qubo.with_consistent_slack(zeros);
  RestartRun run{qubo, adj, schedule, init};
  return run.run(restart_index, best_energy_trace);
}

}  // namespace detail

AnnealSchedule default_schedule(const QuboModel& qubo, uint64_t seed, int reads, int sweeps) {
  AnnealSchedule s;
  s.seed = seed;
  s.reads = reads;
  s.sweeps = sweeps;
  // Restarts climb from the empty assignment, so the ladder starts just hot
  // enough to cross the few-penalty-unit ridges of packing moves; starting
  // far above the penalty weight only randomizes the state back into a pile
  // of violations that single-bit moves cannot untangle.
  s.initial_temperature = std::max(2.0 * qubo.penalty_weight, 1.0);
  double tf = 1e-3 * qubo.min_abs_objective;
  if (!(tf > 0.0)) tf = 1e-9 * s.initial_temperature;
  s.final_temperature = std::min(tf, 0.5 * s.initial_temperature);
  return s;
}

Solution solve_sa(const QuboModel& qubo, const AnnealSchedule& schedule) {
  if (!(schedule.initial_temperature > schedule.final_temperature) ||
      !(schedule.final_temperature > 0.0))
    throw std::invalid_argument("solve_sa: need initial temperature > final temperature > 0");
  if (schedule.sweeps < 1 || schedule.reads < 1)
    throw std::invalid_argument("solve_sa: sweeps and reads must be >= 1");

  const auto t0 = Clock::now();
  Solution sol;
  sol.solver = "sa";
  sol.stats.reads = schedule.reads;

  if (qubo.num_bits == 0) {
    sol.status = SolveStatus::Feasible;
    sol.wall_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return sol;
  }

  Adjacency adj(qubo);
  const std::vector<uint8_t> zeros(qubo.num_decision, 0);
  const std::vector<uint8_t> init = qubo.with_consistent_slack(zeros);
  RestartRun runner{qubo, adj, schedule, init};

  std::vector<detail::RestartResult> results(schedule.reads);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(hw, schedule.reads);
  if (workers <= 1) {
    for (int r = 0; r < schedule.reads; ++r) results[r] = runner.run(r, nullptr);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < schedule.reads; r = next.fetch_add(1))
          results[r] = runner.run(r, nullptr);
      });
    }
    for (auto& t : pool) t.join();
  }

  // Winner: (energy, restart index) lexicographic, independent of thread
  // interleaving.
  int win = 0;
  for (int r = 1; r < schedule.reads; ++r)
    if (results[r].energy < results[win].energy) win = r;
  for (const auto& r : results) sol.stats.sweeps += r.sweeps_done;

  const detail::RestartResult& best = results[win];
  sol.allocation = decode_sample(best.bits, qubo);
  sol.x.assign(qubo.num_decision, 0);
  for (int i = 0; i < qubo.num_decision; ++i) sol.x[i] = best.bits[i];

  std::vector<double> chosen;
  for (int i = 0; i < qubo.num_decision; ++i)
    if (sol.x[i]) chosen.push_back(qubo.objective_coeffs[i]);
  std::sort(chosen.begin(), chosen.end());
  double obj = 0.0;
  for (double c : chosen) obj += c;
  sol.objective_bps = obj;

  // Zero total penalty at the best completion of the decision bits means
  // every lowered constraint is met, which implies feasibility of the
  // original model; the minimum nonzero penalty is one squared unit, i.e.
  // the penalty weight itself. The returned sample's own slack registers may
  // lag behind an otherwise feasible assignment, so they are re-derived.
  const double completed = qubo.energy(qubo.with_consistent_slack(sol.x));
  const double penalty = completed - (-obj + qubo.offset);
  sol.status = penalty < 0.5 * qubo.penalty_weight ? SolveStatus::Feasible : SolveStatus::Unknown;

  sol.wall_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return sol;
}

}  // namespace sliceopt
