// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sliceopt/model.hpp"
#include "sliceopt/qubo.hpp"

namespace sliceopt {

enum class SolveStatus { Optimal, Feasible, Infeasible, Unknown };

std::string to_string(SolveStatus s);

struct SolverStats {
  uint64_t nodes = 0;   // branch-and-bound nodes explored
  uint64_t sweeps = 0;  // total annealing sweeps (all reads)
  uint64_t reads = 0;
  // (nodes explored, incumbent objective) at each incumbent improvement
  std::vector<std::pair<uint64_t, double>> incumbent_trace;
};

struct Solution {
  std::vector<uint8_t> x;  // over the model's decision variables
  Allocation allocation;
  double objective_bps = 0.0;
  SolveStatus status = SolveStatus::Unknown;
  std::string solver;
  double wall_s = 0.0;
  SolverStats stats;
};

struct SolveLimits {
  uint64_t max_nodes = 0;   // 0 = unlimited
  double max_seconds = 0.0; // 0 = unlimited
};

// Depth-first branch and bound, branching on variables in descending
// objective-coefficient order (value 1 first). Status Optimal only when the
// search completes. Hitting a limit returns the incumbent, never throws.
Solution solve_exact(const ConstrainedModel& model, const SolveLimits& limits = {});

// Highest-rate-first assignment that never violates C1-C3. QoS families are
// reported by the verifier, not guaranteed.
Solution solve_greedy(const ConstrainedModel& model);

struct AnnealSchedule {
  double initial_temperature = 0.0;  // energy units
  double final_temperature = 0.0;
  int sweeps = 1000;
  int reads = 10;
  uint64_t seed = 0;
};

// Scale-aware defaults: T0 = the largest single-flip energy magnitude so the
// early sweeps can cross every penalty barrier, Tf = 1e-3 * smallest nonzero
// |objective coefficient| so the freeze-out resolves objective differences.
AnnealSchedule default_schedule(const QuboModel& qubo, uint64_t seed,
                                int reads = 8, int sweeps = 2000);

// `reads` independent single-bit-flip Metropolis restarts over a geometric
// temperature ladder, each ending with a zero-temperature descent to the
// nearest local minimum. Restart r derives its RNG stream from (seed, r) and
// the winner is the (energy, restart index) lexicographic minimum, so the
// result does not depend on execution interleaving.
Solution solve_sa(const QuboModel& qubo, const AnnealSchedule& schedule);

namespace detail {

struct RestartResult {
  std::vector<uint8_t> bits;
  double energy = 0.0;
  uint64_t sweeps_done = 0;
};

// Single restart; when `best_energy_trace` is non-null it records the
// best-so-far energy after every sweep.
RestartResult anneal_restart(const QuboModel& qubo, const AnnealSchedule& schedule,
                             uint64_t restart_index,
                             std::vector<double>* best_energy_trace = nullptr);

}  // namespace detail

}  // namespace sliceopt
