// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sliceopt/scenario.hpp"

namespace sliceopt {

// One binary decision x_{kmn}: RB k serving user n through its home gNodeB m.
struct VarLabel {
  int rb = 0;
  int gnb = 0;
  int user = 0;
  friend constexpr auto operator<=>(const VarLabel&, const VarLabel&) = default;
};

enum class ConstraintFamily : int { C1 = 1, C2 = 2, C3 = 3, C4 = 4, C5 = 5 };
enum class Sense { LessEqual, GreaterEqual };

std::string to_string(ConstraintFamily f);
ConstraintFamily family_from_string(const std::string& s);
std::string to_string(Sense s);
Sense sense_from_string(const std::string& s);

struct LinearTerm {
  int var = 0;  // index into ConstrainedModel::variables
  double coeff = 0.0;
};

struct LinearConstraint {
  ConstraintFamily family = ConstraintFamily::C1;
  std::string name;
  std::vector<LinearTerm> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

// The x = 1 entries of an assignment, ordered by (rb, user).
struct Allocation {
  std::vector<VarLabel> assigned;
};

// Linear binary maximization problem over K x U decision variables.
// Immutable after construction.
struct ConstrainedModel {
  std::vector<VarLabel> variables;  // (rb asc, user asc); index = rb_row * num_users + user_col
  std::vector<double> objective;    // maximize; coefficients are per-RB rates, bits/s
  std::vector<LinearConstraint> constraints;
  std::shared_ptr<const Scenario> scenario;  // provenance; null for synthetic/wire models
  int num_rbs = 0;
  int num_users = 0;
  std::unordered_map<int, int> rb_row;    // rb id -> row
  std::unordered_map<int, int> user_col;  // user id -> column

  int index_of(int rb_id, int user_id) const;  // -1 if absent
  double objective_value(std::span<const uint8_t> x) const;
  double constraint_lhs(const LinearConstraint& c, std::span<const uint8_t> x) const;
  bool satisfied(const LinearConstraint& c, std::span<const uint8_t> x, double rel_tol = 1e-9) const;
  bool feasible(std::span<const uint8_t> x, double rel_tol = 1e-9) const;
  Allocation to_allocation(std::span<const uint8_t> x) const;
  std::vector<uint8_t> to_bits(const Allocation& alloc) const;  // throws on unknown labels
};

// The rate at which the slice's QoS bound is met exactly: R_min for eMBB,
// delta * (lambda + 1/D_max) for URLLC (the delay cap turned into an
// equivalent linear rate floor).
double qos_rate_floor(const SliceParams& slice);

// Full problem: objective plus C1 (per-user cap), C2 (RB uniqueness),
// C3 (borrow only after the native pool is exhausted), C4 (eMBB rate floor),
// C5 (URLLC delay cap, linearized). C6 is the binary domain itself.
ConstrainedModel build_model(const Scenario& sc);

// Knapsack relaxation: same variables and objective, constraints restricted
// to the C1 and C2 families.
ConstrainedModel relaxed_knapsack_model(const Scenario& sc);

// Wire/debug format: {variables, objective, constraints}.
nlohmann::json model_to_json(const ConstrainedModel& m);
ConstrainedModel model_from_json(const nlohmann::json& j);

}  // namespace sliceopt
