// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "sliceopt/solvers.hpp"

namespace sliceopt {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unknown: return "unknown";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Row {
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
  double tol = 0.0;
  double fixed = 0.0;     // activity of variables fixed to 1
  double free_neg = 0.0;  // sum of min(0, a) over undecided variables
  double free_pos = 0.0;  // sum of max(0, a) over undecided variables

  bool completion_feasible() const {
    return sense == Sense::LessEqual ? fixed + free_neg <= rhs + tol
                                     : fixed + free_pos >= rhs - tol;
  }
};

// Depth-first branch and bound. Branch order is descending objective
// coefficient (ties by variable index), value 1 first, which makes the first
// dive mirror the greedy allocation. The objective bound is the smaller of a
// per-RB bound (best undecided gain per still-free RB) and a per-user bound
// (top remaining gains within the user's residual C1 cap); both are valid
// upper bounds on any feasible completion, so their minimum is too.
class ExactSearch {
 public:
  ExactSearch(const ConstrainedModel& model, const SolveLimits& limits)
      : model_(model), limits_(limits), n_(static_cast<int>(model.variables.size())) {
    t0_ = Clock::now();
    build();
  }

  Solution run() {
    Solution sol;
    sol.solver = "exact";

    bool root_ok = true;
    for (const Row& row : rows_)
      if (!row.completion_feasible()) root_ok = false;
    if (root_ok) dfs(0);

    sol.stats.nodes = nodes_;
    sol.stats.incumbent_trace = std::move(trace_);
    if (has_incumbent_) {
      sol.x = best_x_;
      sol.status = stopped_ ? SolveStatus::Feasible : SolveStatus::Optimal;
    } else {
      sol.x.assign(n_, 0);
      sol.status = stopped_ ? SolveStatus::Unknown : SolveStatus::Infeasible;
    }
    sol.allocation = model_.to_allocation(sol.x);
    sol.objective_bps = has_incumbent_ ? best_obj_ : 0.0;
    sol.wall_s = std::chrono::duration<double>(Clock::now() - t0_).count();
    return sol;
  }

 private:
  void build() {
    value_.assign(n_, -1);

    // Borrow variables and pool membership, derived from the C3 rows: the
    // positive-coefficient variable is the borrow, the negative ones span the
    // borrowing gNodeB's native pool.
    is_borrow_.assign(n_, 0);
    for (const LinearConstraint& c : model_.constraints) {
      if (c.family != ConstraintFamily::C3) continue;
      for (const auto& t : c.terms) {
        if (t.coeff > 0.0) is_borrow_[t.var] = 1;
        if (t.coeff < 0.0) rb_pool_gnb_[model_.variables[t.var].rb] = model_.variables[t.var].gnb;
      }
    }

    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      if (model_.objective[a] != model_.objective[b])
        return model_.objective[a] > model_.objective[b];
      // Equal gains: dive through native assignments first; a speculative
      // borrow poisons the lender's pool for the whole subtree.
      return is_borrow_[a] < is_borrow_[b];
    });

    rows_.resize(model_.constraints.size());
    var_rows_.resize(n_);
    for (size_t ci = 0; ci < model_.constraints.size(); ++ci) {
      const LinearConstraint& c = model_.constraints[ci];
      Row& row = rows_[ci];
      row.sense = c.sense;
      row.rhs = c.rhs;
      row.tol = 1e-9 * std::max(1.0, std::abs(c.rhs));
      for (const auto& t : c.terms) {
        row.free_neg += std::min(0.0, t.coeff);
        row.free_pos += std::max(0.0, t.coeff);
        var_rows_[t.var].push_back({static_cast<int>(ci), t.coeff});
      }
    }

    // Group variables by label; used by the bounds and the RB-counting prune.
    std::unordered_map<int, int> user_idx;
    std::unordered_map<int, int> rb_idx;
    var_user_.resize(n_);
    var_rb_.resize(n_);
    for (int v = 0; v < n_; ++v) {
      const VarLabel& lab = model_.variables[v];
      auto [uit, unew] = user_idx.emplace(lab.user, static_cast<int>(user_idx.size()));
      auto [rit, rnew] = rb_idx.emplace(lab.rb, static_cast<int>(rb_idx.size()));
      var_user_[v] = uit->second;
      var_rb_[v] = rit->second;
    }
    n_users_ = static_cast<int>(user_idx.size());
    n_rbs_ = static_cast<int>(rb_idx.size());
    user_vars_.resize(n_users_);
    rb_vars_.resize(n_rbs_);
    for (int v : order_) user_vars_[var_user_[v]].push_back(v);  // coeff-descending
    for (int v = 0; v < n_; ++v) rb_vars_[var_rb_[v]].push_back(v);
    user_used_.assign(n_users_, 0);
    rb_used_.assign(n_rbs_, 0);
    rb_free_cnt_.assign(n_rbs_, 0);
    for (int v = 0; v < n_; ++v) ++rb_free_cnt_[var_rb_[v]];

    // C1 rows that cover exactly one user group with unit coefficients give
    // per-user caps; C2 rows with unit coefficients and rhs 1 cap an RB.
    user_cap_.assign(n_users_, std::numeric_limits<int>::max());
    std::vector<bool> rb_capped(n_rbs_, false);
    for (size_t ci = 0; ci < model_.constraints.size(); ++ci) {
      const LinearConstraint& c = model_.constraints[ci];
      if (c.family == ConstraintFamily::C1 && c.sense == Sense::LessEqual && !c.terms.empty()) {
        bool uniform = true;
        const int u = var_user_[c.terms.front().var];
        for (const auto& t : c.terms)
          if (t.coeff != 1.0 || var_user_[t.var] != u) uniform = false;
        if (uniform)
          user_cap_[u] = std::min(user_cap_[u], static_cast<int>(std::floor(c.rhs + 1e-9)));
      } else if (c.family == ConstraintFamily::C2 && c.sense == Sense::LessEqual &&
                 c.rhs == 1.0 && !c.terms.empty()) {
        bool uniform = true;
        const int r = var_rb_[c.terms.front().var];
        for (const auto& t : c.terms)
          if (t.coeff != 1.0 || var_rb_[t.var] != r) uniform = false;
        if (uniform) rb_capped[r] = true;
      } else if ((c.family == ConstraintFamily::C4 || c.family == ConstraintFamily::C5) &&
                 c.sense == Sense::GreaterEqual && !c.terms.empty()) {
        // Usable for the coverage bound when the row is this user's own rate
        // sum, i.e. coefficients match the objective gains.
        bool usable = true;
        const int u = var_user_[c.terms.front().var];
        for (const auto& t : c.terms)
          if (t.coeff <= 0.0 || var_user_[t.var] != u || t.coeff != model_.objective[t.var])
            usable = false;
        if (usable) {
          floor_rows_.push_back(static_cast<int>(ci));
          floor_user_[static_cast<int>(ci)] = u;
        }
      }
    }
    rb_capacity_info_ = true;
    for (bool capped : rb_capped)
      if (!capped) rb_capacity_info_ = false;
    if (n_rbs_ == 0) rb_capacity_info_ = false;

    // Pool-level accounting for the C3 coverage prune.
    rb_pool_.assign(n_rbs_, -1);
    for (auto& [rb, gnb] : rb_pool_gnb_) {
      auto it = rb_idx.find(rb);
      if (it == rb_idx.end()) continue;
      auto [git, fresh] = gnb_idx_.emplace(gnb, static_cast<int>(gnb_idx_.size()));
      rb_pool_[it->second] = git->second;
    }
    pool_free_.assign(gnb_idx_.size(), 0);
    for (int r = 0; r < n_rbs_; ++r)
      if (rb_pool_[r] >= 0) ++pool_free_[rb_pool_[r]];
    foreign_native_taken_.assign(gnb_idx_.size(), 0);
    gnb_of_user_.assign(n_users_, -1);
    for (int v = 0; v < n_; ++v) {
      auto it = gnb_idx_.find(model_.variables[v].gnb);
      if (it != gnb_idx_.end()) gnb_of_user_[var_user_[v]] = it->second;
    }
  }

  void fix(int v, int val) {
    value_[v] = static_cast<int8_t>(val);
    for (const auto& [ri, a] : var_rows_[v]) {
      Row& row = rows_[ri];
      row.free_neg -= std::min(0.0, a);
      row.free_pos -= std::max(0.0, a);
      if (val) row.fixed += a;
    }
    if (val) {
      cur_obj_ += model_.objective[v];
      ++user_used_[var_user_[v]];
      const int r = var_rb_[v];
      if (++rb_used_[r] == 1 && rb_pool_[r] >= 0) --pool_free_[rb_pool_[r]];
      if (rb_pool_[r] >= 0 && rb_pool_[r] != gnb_of_user_[var_user_[v]])
        ++foreign_native_taken_[rb_pool_[r]];
    }
    --rb_free_cnt_[var_rb_[v]];
  }

  void unfix(int v, int val) {
    value_[v] = -1;
    for (const auto& [ri, a] : var_rows_[v]) {
      Row& row = rows_[ri];
      row.free_neg += std::min(0.0, a);
      row.free_pos += std::max(0.0, a);
      if (val) row.fixed -= a;
    }
    if (val) {
      cur_obj_ -= model_.objective[v];
      --user_used_[var_user_[v]];
      const int r = var_rb_[v];
      if (--rb_used_[r] == 0 && rb_pool_[r] >= 0) ++pool_free_[rb_pool_[r]];
      if (rb_pool_[r] >= 0 && rb_pool_[r] != gnb_of_user_[var_user_[v]])
        --foreign_native_taken_[rb_pool_[r]];
    }
    ++rb_free_cnt_[var_rb_[v]];
  }

  // Once a foreign user holds one of a pool's RBs, that pool can never be
  // exhausted by its own users, so C3 bars its gNodeB from borrowing for the
  // rest of the subtree: its below-floor users must then fit into the pool's
  // remaining free RBs.
  bool pool_coverage_ok() const {
    if (!rb_capacity_info_ || pool_free_.empty() || floor_rows_.empty()) return true;
    std::vector<int> needy(pool_free_.size(), 0);
    bool any = false;
    for (int ri : floor_rows_) {
      const Row& row = rows_[ri];
      if (row.fixed < row.rhs - row.tol) {
        const int g = gnb_of_user_[floor_user_.at(ri)];
        if (g >= 0) {
          ++needy[g];
          any = true;
        }
      }
    }
    if (!any) return true;
    for (size_t g = 0; g < needy.size(); ++g)
      if (foreign_native_taken_[g] > 0 && needy[g] > pool_free_[g]) return false;
    return true;
  }

  bool rows_ok(int v) const {
    for (const auto& [ri, a] : var_rows_[v])
      if (!rows_[ri].completion_feasible()) return false;
    return true;
  }

  // Upper bound on the objective gain of any feasible completion, or -inf
  // when the coverage accounting already proves infeasibility.
  //
  // User side: every user whose rate floor is unmet is first charged its
  // minimum number of additional RBs (valued at its own top undecided gains);
  // with RB-uniqueness info the mandatory counts share the budget of
  // still-free RBs, and whatever budget remains is filled from the globally
  // best residual per-user capacities. Degrades to the plain top-cap greedy
  // bound when floors or capacity info are absent.
  double bound_remaining() const {
    constexpr double kMinusInf = -std::numeric_limits<double>::infinity();
    // Floor shortfalls per user group.
    std::vector<double> shortfall(n_users_, 0.0);
    for (int ri : floor_rows_) {
      const Row& row = rows_[ri];
      if (row.fixed < row.rhs - row.tol) {
        const int u = floor_user_.at(ri);
        shortfall[u] = std::max(shortfall[u], row.rhs - row.fixed);
      }
    }

    double mandatory_value = 0.0;
    int mandatory_rbs = 0;
    std::vector<double> extras;
    extras.reserve(64);
    for (int u = 0; u < n_users_; ++u) {
      int cap = user_cap_[u] == std::numeric_limits<int>::max()
                    ? std::numeric_limits<int>::max()
                    : user_cap_[u] - user_used_[u];
      if (cap <= 0) {
        if (shortfall[u] > 0.0) return kMinusInf;  // capped below its floor
        continue;
      }
      double need = shortfall[u];
      for (int v : user_vars_[u]) {
        if (value_[v] != -1) continue;
        const double c = model_.objective[v];
        if (c <= 0.0) break;  // descending order: nothing positive left
        if (need > 0.0) {
          mandatory_value += c;
          ++mandatory_rbs;
          need -= c;
        } else {
          extras.push_back(c);
        }
        if (--cap == 0) break;
      }
      if (need > 0.0) return kMinusInf;  // floor unreachable within the cap
    }

    double b_user;
    if (!rb_capacity_info_) {
      b_user = mandatory_value;
      for (double c : extras) b_user += c;
    } else {
      int budget = 0;
      for (int r = 0; r < n_rbs_; ++r)
        if (rb_used_[r] == 0 && rb_free_cnt_[r] > 0) ++budget;
      budget -= mandatory_rbs;
      if (budget < 0) return kMinusInf;  // not enough distinct RBs to cover floors
      std::sort(extras.begin(), extras.end(), std::greater<double>());
      b_user = mandatory_value;
      for (int i = 0; i < std::min<int>(budget, static_cast<int>(extras.size())); ++i)
        b_user += extras[i];
    }

    if (!rb_capacity_info_) return b_user;
    // Per-RB: each still-free RB contributes at most its best undecided gain.
    double b_rb = 0.0;
    for (int r = 0; r < n_rbs_; ++r) {
      if (rb_used_[r] != 0) continue;
      double best = 0.0;
      for (int v : rb_vars_[r])
        if (value_[v] == -1) best = std::max(best, model_.objective[v]);
      b_rb += best;
    }
    return std::min(b_user, b_rb);
  }

  bool limits_hit() {
    if (limits_.max_nodes && nodes_ > limits_.max_nodes) return true;
    if (limits_.max_seconds > 0.0 && (nodes_ & 0xfff) == 0) {
      if (std::chrono::duration<double>(Clock::now() - t0_).count() > limits_.max_seconds)
        return true;
    }
    return false;
  }

  void dfs(int depth) {
    if (stopped_) return;
    ++nodes_;
    if (limits_hit()) {
      stopped_ = true;
      return;
    }
    if (depth == n_) {
      const double obj = model_.objective_value(value_as_bits());
      if (!has_incumbent_ || obj > best_obj_) {
        has_incumbent_ = true;
        best_obj_ = obj;
        best_x_ = value_as_bits();
        trace_.push_back({nodes_, obj});
      }
      return;
    }
    const int v = order_[depth];
    for (int val : {1, 0}) {
      fix(v, val);
      bool ok = rows_ok(v) && pool_coverage_ok();
      if (ok) {
        const double bound = bound_remaining();
        if (bound == -std::numeric_limits<double>::infinity()) {
          ok = false;
        } else if (has_incumbent_) {
          // Ties prune: an equal bound cannot improve the incumbent. The
          // margin absorbs summation-order noise, which otherwise leaves
          // mathematically tied subtrees microscopically "better" and
          // explodes the search; distinct rate multisets differ by far more.
          const double margin = 1e-9 * std::max(1.0, std::abs(best_obj_));
          ok = cur_obj_ + bound > best_obj_ + margin;
        }
      }
      if (ok) dfs(depth + 1);
      unfix(v, val);
      if (stopped_) return;
    }
  }

  std::vector<uint8_t> value_as_bits() const {
    std::vector<uint8_t> x(n_);
    for (int i = 0; i < n_; ++i) x[i] = value_[i] == 1 ? 1 : 0;
    return x;
  }

  const ConstrainedModel& model_;
  const SolveLimits& limits_;
  int n_;
  Clock::time_point t0_;

  std::vector<int> order_;
  std::vector<int8_t> value_;
  std::vector<Row> rows_;
  std::vector<std::vector<std::pair<int, double>>> var_rows_;

  std::vector<int> var_user_, var_rb_;
  int n_users_ = 0, n_rbs_ = 0;
  std::vector<std::vector<int>> user_vars_, rb_vars_;
  std::vector<int> user_used_, rb_used_, rb_free_cnt_;
  std::vector<int> user_cap_;
  std::vector<int> floor_rows_;
  std::unordered_map<int, int> floor_user_;  // row index -> user group
  bool rb_capacity_info_ = false;

  std::vector<uint8_t> is_borrow_;
  std::unordered_map<int, int> rb_pool_gnb_;  // rb id -> owning gnb id (from C3 rows)
  std::unordered_map<int, int> gnb_idx_;      // gnb id -> pool index
  std::vector<int> rb_pool_;                  // rb group -> pool index or -1
  std::vector<int> pool_free_;                // pool -> free RBs remaining
  std::vector<int> foreign_native_taken_;     // pool -> RBs held by foreign users
  std::vector<int> gnb_of_user_;              // user group -> pool index or -1

  double cur_obj_ = 0.0;
  double best_obj_ = -kInf;
  std::vector<uint8_t> best_x_;
  bool has_incumbent_ = false;
  uint64_t nodes_ = 0;
  bool stopped_ = false;
  std::vector<std::pair<uint64_t, double>> trace_;
};

}  // namespace

Solution solve_exact(const ConstrainedModel& model, const SolveLimits& limits) {
  ExactSearch search(model, limits);
  return search.run();
}

}  // namespace sliceopt
