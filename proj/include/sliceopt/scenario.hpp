// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace sliceopt {

enum class SliceKind { Urllc, Embb };

std::string to_string(SliceKind kind);
SliceKind slice_kind_from_string(const std::string& s);

// Per-slice traffic and QoS parameters. Exactly one of rate_floor_bps /
// delay_cap_s is active, selected by the slice kind.
struct SliceParams {
  SliceKind kind = SliceKind::Embb;
  double packet_rate_pps = 0.0;  // lambda_s
  double packet_len_bits = 0.0;  // delta_s
  double rate_floor_bps = 0.0;   // R_min, eMBB only
  double delay_cap_s = 0.0;      // D_max, URLLC only
};

struct GNodeB {
  int id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  double coverage_radius_m = 0.0;
  double tx_power_w = 0.0;  // per-RB transmit power, identical across RBs and slices
  std::vector<int> rb_ids;  // this gNodeB's pool; ids are globally unique
};

struct UserEquipment {
  int id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  SliceKind slice = SliceKind::Embb;
  int home_gnb = 0;  // the single serving gNodeB
};

// Immutable after construction; safe to share read-only across workers.
struct Scenario {
  uint64_t seed = 0;
  double carrier_freq_hz = 0.0;
  double rb_bandwidth_hz = 0.0;
  double noise_w = 0.0;
  int k_max = 1;  // per-user RB cap
  SliceParams urllc;
  SliceParams embb;
  std::vector<GNodeB> gnbs;
  std::vector<UserEquipment> users;

  const SliceParams& params_for(SliceKind k) const { return k == SliceKind::Urllc ? urllc : embb; }
  const GNodeB* find_gnb(int id) const;
  const UserEquipment* find_user(int id) const;
  int rb_owner(int rb_id) const;        // owning gNodeB id, or -1
  std::vector<int> all_rb_ids() const;  // global pool, ascending
  double distance_to_home(const UserEquipment& ue) const;
  // FSPL is frequency-flat and the home gNodeB transmits on borrowed RBs too,
  // so the per-RB rate is a single value per user.
  double user_rb_rate(const UserEquipment& ue) const;
  void validate() const;  // throws std::invalid_argument on broken invariants
};

struct ScenarioConfig {
  std::vector<int> rbs_per_gnb;
  std::vector<int> users_per_gnb;
  double urllc_fraction = 0.5;
  double area_width_m = 1000.0;
  double area_height_m = 1000.0;
  double coverage_radius_m = 300.0;
  double carrier_freq_hz = 3.7e9;  // n77
  double rb_bandwidth_hz = 180.0e3;
  double noise_dbm = -117.0;
  double tx_dbm = 30.0;
  int k_max = 3;
  double min_user_distance_m = 1.0;
  SliceParams urllc{SliceKind::Urllc, 100.0, 120.0, 0.0, 10.0e-3};
  SliceParams embb{SliceKind::Embb, 100.0, 400.0, 100.0e3, 0.0};
};

// Deterministic: identical (config, seed) yields a bit-identical scenario.
// gNodeBs go on a seed-jittered grid with every coverage disc inside the
// area; users are uniform in their home gNodeB's disc.
Scenario generate_scenario(const ScenarioConfig& config, uint64_t seed);

nlohmann::json scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::json& j);
void save_scenario(const Scenario& sc, const std::string& path);
Scenario load_scenario(const std::string& path);

}  // namespace sliceopt
