// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>

#include "sliceopt/solvers.hpp"

namespace sliceopt {

namespace {
using Clock = std::chrono::steady_clock;
}

// Repeatedly assigns the highest-rate feasible (RB, user) pair until none is
// left, respecting C1 (per-user cap), C2 (RB uniqueness) and C3 (a foreign RB
// only once the home pool is fully allocated to the home gNodeB's own users).
// Ties break lexicographically on (rb, user). This reproduces the
// monopolization behavior of the rate-maximizing objective: top users take
// k_max RBs until the supply runs out.
Solution solve_greedy(const ConstrainedModel& model) {
  const auto t0 = Clock::now();
  if (!model.scenario)
    throw std::invalid_argument("solve_greedy: model carries no scenario (build it with build_model)");
  const Scenario& sc = *model.scenario;
  const int n = static_cast<int>(model.variables.size());

  // Candidates in descending rate order; model variable order is (rb asc,
  // user asc), so stable sort gives the lexicographic tie-break.
  std::vector<int> cand(n);
  std::iota(cand.begin(), cand.end(), 0);
  std::stable_sort(cand.begin(), cand.end(),
                   [&](int a, int b) { return model.objective[a] > model.objective[b]; });

  std::unordered_map<int, int> rb_owner;   // rb -> owning gnb
  std::unordered_map<int, int> pool_size;  // gnb -> |K_m|
  for (const auto& g : sc.gnbs) {
    pool_size[g.id] = static_cast<int>(g.rb_ids.size());
    for (int rb : g.rb_ids) rb_owner[rb] = g.id;
  }

  std::unordered_map<int, int> user_count;      // user -> RBs held
  std::unordered_map<int, int> native_to_own;   // gnb -> native RBs held by its own users
  std::unordered_map<int, uint8_t> rb_taken;
  std::vector<uint8_t> x(n, 0);

  bool progress = true;
  while (progress) {
    progress = false;
    for (int v : cand) {
      if (x[v]) continue;
      const VarLabel& lab = model.variables[v];
      if (rb_taken[lab.rb]) continue;
      if (user_count[lab.user] >= sc.k_max) continue;
      const int owner = rb_owner.at(lab.rb);
      const bool borrowed = owner != lab.gnb;
      if (borrowed && native_to_own[lab.gnb] < pool_size.at(lab.gnb)) continue;
      x[v] = 1;
      rb_taken[lab.rb] = 1;
      ++user_count[lab.user];
      if (!borrowed) ++native_to_own[owner];
      progress = true;
      break;  // restart the scan: an assignment can unlock borrowing
    }
  }

  Solution sol;
  sol.solver = "greedy";
  sol.x = std::move(x);
  sol.allocation = model.to_allocation(sol.x);
  sol.objective_bps = model.objective_value(sol.x);
  sol.status = model.feasible(sol.x) ? SolveStatus::Feasible : SolveStatus::Unknown;
  sol.wall_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return sol;
}

}  // namespace sliceopt
