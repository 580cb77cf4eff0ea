// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sliceopt/model.hpp"
#include "sliceopt/scenario.hpp"

namespace sliceopt {

// M/M/1 delay; unstable when the service rate does not exceed the arrival
// rate. Unstable is a value, not an error, so reports stay portable.
struct DelayEstimate {
  bool stable = false;
  double seconds = 0.0;  // meaningful only when stable
};

struct UserMetrics {
  int user_id = 0;
  SliceKind slice = SliceKind::Embb;
  double rate_bps = 0.0;
  DelayEstimate delay;
  int rbs_assigned = 0;
  int borrowed_rbs = 0;  // RBs whose owner differs from the user's home gNodeB
  bool qos_ok = false;
};

struct GnbMetrics {
  int gnb_id = 0;
  int served_users = 0;    // associated users holding at least one RB
  int pool_consumers = 0;  // distinct users (any association) holding RBs from this pool
  int rbs_used = 0;
  int rbs_total = 0;
};

struct ConstraintViolation {
  std::string detail;
  int rb = -1;
  int gnb = -1;
  int user = -1;
};

struct FamilyCheck {
  std::string family;  // "C1".."C6"
  bool pass = true;
  std::vector<ConstraintViolation> violations;
};

struct VerificationReport {
  std::vector<FamilyCheck> families;  // C1..C6 in order
  std::vector<UserMetrics> users;
  std::vector<GnbMetrics> gnbs;
  bool feasible = false;  // true iff every family passes

  const FamilyCheck& family(const std::string& name) const;
};

// Recomputed from scenario geometry (gain and rate evaluated from scratch),
// never from a model's rate table.
double user_rate(const Allocation& alloc, const Scenario& sc, int user_id);

DelayEstimate user_delay(double rate_bps, const SliceParams& slice);

// Full independent recheck: C1 (per-user cap), C2 (RB uniqueness), C3
// (borrowing only after the native pool is exhausted), C4 (eMBB rate floor),
// C5 (URLLC delay via the delay formula directly, not the linearized floor),
// C6 (binary domain / duplicate entries). Throws std::invalid_argument when
// the allocation references unknown ids.
VerificationReport verify_allocation(const Allocation& alloc, const Scenario& sc);

nlohmann::json report_to_json(const VerificationReport& report);

}  // namespace sliceopt
