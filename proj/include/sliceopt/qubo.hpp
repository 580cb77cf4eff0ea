// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "sliceopt/model.hpp"

namespace sliceopt {

enum class SlackEncoding {
  // One bit per slack unit. Larger, but every slack value is reachable in
  // single-bit steps, which keeps the registers mobile under bit-flip
  // annealing.
  Unary,
  // Power-of-two weights plus one residual bit: minimal bit count, but a
  // register can wedge mid-range where every single flip overshoots.
  Binary,
};

struct PenaltyConfig {
  // <= 0 means "use min_penalty_bound(model)". Explicit values below the
  // bound are rejected.
  double penalty_weight = 0.0;
  // Quantization step for the real-valued C4/C5 coefficients, bits/s.
  double rate_quantum_bps = 1000.0;
  SlackEncoding slack_encoding = SlackEncoding::Unary;
};

struct SlackBit {
  int bit = 0;        // bit index in the QUBO
  int64_t weight = 0; // power-of-two or residual weight, in constraint units
};

// Per-row slack bookkeeping: the canonical integerized <= form and the binary
// slack expansion that turns it into an equality inside the penalty.
struct SlackGroup {
  int constraint = -1;  // index into the source model's constraint list
  ConstraintFamily family = ConstraintFamily::C1;
  double unit = 1.0;  // bits/s per coefficient unit: 1 for C1..C3, rate_quantum for C4/C5
  std::vector<std::pair<int, int64_t>> terms;  // (bit, integer coefficient); may include aux bits
  int64_t rhs = 0;
  int64_t range = 0;  // rhs - min over x of the lhs; slack covers [0, range]
  std::vector<SlackBit> bits;
};

// Pool-exhaustion indicator introduced by the C3 aggregation: one bit per
// gNodeB that is 1 exactly when any of the listed borrow bits is 1.
struct AuxIndicator {
  int bit = 0;
  std::vector<int> any_of;  // decision bits implying the indicator
  std::vector<int> groups;  // slack_registry entries referencing the bit
};

// min_x x^T Q x over decision + slack bits, upper-triangular Q. The offset is
// the constant linking energies back to the source objective: an assignment
// satisfying every lowered constraint with matching slack has
// x^T Q x = -objective + offset. Immutable after construction; safe for
// concurrent reads.
struct QuboModel {
  int num_bits = 0;
  int num_decision = 0;
  std::unordered_map<uint64_t, double> coeffs;  // key = pack(i, j), i <= j
  double offset = 0.0;
  std::vector<VarLabel> decision_labels;  // bijection onto the first num_decision bits
  std::vector<double> objective_coeffs;   // original maximization coefficients, bits/s
  std::vector<SlackGroup> slack_registry;
  std::vector<AuxIndicator> aux_registry;
  double penalty_weight = 0.0;
  double rate_quantum_bps = 0.0;
  double min_abs_objective = 0.0;  // smallest nonzero |objective coefficient|

  static constexpr uint64_t pack(int i, int j) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(i)) << 32) | static_cast<uint32_t>(j);
  }
  void add_coeff(int i, int j, double v);
  double coeff_at(int i, int j) const;
  double energy(std::span<const uint8_t> bits) const;
  // Completes decision bits with the energy-minimizing auxiliary and slack
  // settings (per-row best slack, exact minimization over each indicator).
  // For an assignment satisfying every lowered constraint this is the
  // consistent slack encoding with zero total penalty.
  std::vector<uint8_t> with_consistent_slack(std::span<const uint8_t> decision_bits) const;
  // Flat text dump: header lines for num_bits and offset, then `i j value`.
  void write_coefficients(std::ostream& os) const;
};

// U + 1 with U = sum of positive objective coefficients: one unit of
// constraint violation then costs more than the whole attainable objective.
double min_penalty_bound(const ConstrainedModel& model);

// Number of binary-expansion slack bits covering the integer range [0, range].
int slack_bit_count(int64_t range);
// Ascending power-of-two weights plus one residual weight; every integer in
// [0, range] is representable and nothing above it.
std::vector<int64_t> slack_weights(int64_t range);
std::vector<int64_t> slack_weights(int64_t range, SlackEncoding encoding);

QuboModel to_qubo(const ConstrainedModel& model, const PenaltyConfig& cfg = {});

// Projects onto the decision bits; makes no feasibility claim.
Allocation decode_sample(std::span<const uint8_t> bits, const QuboModel& qubo);

}  // namespace sliceopt
