// SPDX-License-Identifier: Apache-2.0
#include "sliceopt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "sliceopt/radio.hpp"

namespace sliceopt {

const FamilyCheck& VerificationReport::family(const std::string& name) const {
  for (const auto& f : families)
    if (f.family == name) return f;
  throw std::invalid_argument("no such constraint family: " + name);
}

namespace {

// Per-RB rate recomputed from geometry; deliberately not read from any model
// rate table so a builder bug cannot self-certify.
double recomputed_rb_rate(const Scenario& sc, const UserEquipment& ue) {
  const GNodeB* home = sc.find_gnb(ue.home_gnb);
  if (!home) throw std::invalid_argument("verify: user references unknown gNodeB");
  const double d = std::hypot(ue.x_m - home->x_m, ue.y_m - home->y_m);
  const double gain = channel_gain_fspl(d, sc.carrier_freq_hz);
  return per_rb_rate(sc.rb_bandwidth_hz, home->tx_power_w, gain, sc.noise_w);
}

}  // namespace

double user_rate(const Allocation& alloc, const Scenario& sc, int user_id) {
  const UserEquipment* ue = sc.find_user(user_id);
  if (!ue) throw std::invalid_argument("verify: unknown user id");
  const double rb_rate = recomputed_rb_rate(sc, *ue);
  std::set<int> rbs;  // a duplicate entry is a C6 finding, not extra rate
  for (const auto& label : alloc.assigned)
    if (label.user == user_id) rbs.insert(label.rb);
  return static_cast<double>(rbs.size()) * rb_rate;
}

DelayEstimate user_delay(double rate_bps, const SliceParams& slice) {
  if (rate_bps < 0.0) throw std::invalid_argument("user_delay: negative rate");
  const double service_rate = rate_bps / slice.packet_len_bits;  // packets/s
  if (service_rate <= slice.packet_rate_pps) return {false, 0.0};
  return {true, 1.0 / (service_rate - slice.packet_rate_pps)};
}

VerificationReport verify_allocation(const Allocation& alloc, const Scenario& sc) {
  sc.validate();

  VerificationReport report;
  report.families.resize(6);
  for (int i = 0; i < 6; ++i) report.families[i].family = "C" + std::to_string(i + 1);
  FamilyCheck& c1 = report.families[0];
  FamilyCheck& c2 = report.families[1];
  FamilyCheck& c3 = report.families[2];
  FamilyCheck& c4 = report.families[3];
  FamilyCheck& c5 = report.families[4];
  FamilyCheck& c6 = report.families[5];

  // Resolve every label; unknown ids are errors, duplicates are C6 findings
  // (the entry would need a value above 1).
  std::set<std::pair<int, int>> seen;
  std::map<int, std::vector<int>> user_rbs;  // user -> assigned rb ids
  std::map<int, std::set<int>> rb_users;     // rb -> users holding it
  for (const auto& label : alloc.assigned) {
    const UserEquipment* ue = sc.find_user(label.user);
    if (!ue) throw std::invalid_argument("verify: allocation references unknown user");
    if (sc.rb_owner(label.rb) < 0)
      throw std::invalid_argument("verify: allocation references unknown RB");
    if (ue->home_gnb != label.gnb)
      throw std::invalid_argument("verify: label gNodeB is not the user's home gNodeB");
    if (!seen.insert({label.rb, label.user}).second) {
      c6.violations.push_back(
          {"duplicate assignment entry (value exceeds the binary domain)", label.rb, label.gnb,
           label.user});
      continue;
    }
    user_rbs[label.user].push_back(label.rb);
    rb_users[label.rb].insert(label.user);
  }

  // C1: nobody holds more than k_max RBs.
  for (const auto& [uid, rbs] : user_rbs) {
    if (static_cast<int>(rbs.size()) > sc.k_max) {
      c1.violations.push_back({"user holds " + std::to_string(rbs.size()) + " RBs, cap is " +
                                   std::to_string(sc.k_max),
                               -1, -1, uid});
    }
  }

  // C2: no RB serves two users.
  for (const auto& [rb, users] : rb_users) {
    if (users.size() > 1) {
      std::string detail = "RB serves " + std::to_string(users.size()) + " users:";
      for (int uid : users) detail += " " + std::to_string(uid);
      c2.violations.push_back({detail, rb, sc.rb_owner(rb), -1});
    }
  }

  // C3: borrowing requires the borrower's native pool to be exhausted by its
  // own users (literal transcription: |K_m| per borrowed entry vs the native
  // pool allocation count).
  std::map<int, int> native_to_own;  // gnb -> native RBs held by its own users
  for (const auto& [uid, rbs] : user_rbs) {
    const UserEquipment& ue = *sc.find_user(uid);
    for (int rb : rbs)
      if (sc.rb_owner(rb) == ue.home_gnb) ++native_to_own[ue.home_gnb];
  }
  for (const auto& [uid, rbs] : user_rbs) {
    const UserEquipment& ue = *sc.find_user(uid);
    const GNodeB& home = *sc.find_gnb(ue.home_gnb);
    const int pool = static_cast<int>(home.rb_ids.size());
    for (int rb : rbs) {
      if (sc.rb_owner(rb) == ue.home_gnb) continue;
      if (native_to_own[ue.home_gnb] < pool) {
        c3.violations.push_back({"borrowed RB while home pool has " +
                                     std::to_string(pool - native_to_own[ue.home_gnb]) +
                                     " RBs not serving its own users",
                                 rb, ue.home_gnb, uid});
      }
    }
  }

  // Per-user metrics plus C4/C5. C5 goes through the delay formula directly,
  // not the linearized floor.
  for (const auto& ue : sc.users) {
    UserMetrics um;
    um.user_id = ue.id;
    um.slice = ue.slice;
    um.rate_bps = user_rate(alloc, sc, ue.id);
    const SliceParams& slice = sc.params_for(ue.slice);
    um.delay = user_delay(um.rate_bps, slice);
    auto it = user_rbs.find(ue.id);
    if (it != user_rbs.end()) {
      um.rbs_assigned = static_cast<int>(it->second.size());
      for (int rb : it->second)
        if (sc.rb_owner(rb) != ue.home_gnb) ++um.borrowed_rbs;
    }
    if (ue.slice == SliceKind::Embb) {
      um.qos_ok = um.rate_bps >= slice.rate_floor_bps;
      if (!um.qos_ok) {
        c4.violations.push_back({"eMBB rate " + std::to_string(um.rate_bps) + " bps below floor " +
                                     std::to_string(slice.rate_floor_bps) + " bps",
                                 -1, ue.home_gnb, ue.id});
      }
    } else {
      um.qos_ok = um.delay.stable && um.delay.seconds <= slice.delay_cap_s;
      if (!um.qos_ok) {
        const std::string d =
            um.delay.stable ? std::to_string(um.delay.seconds) + " s" : std::string("unstable");
        c5.violations.push_back(
            {"URLLC delay " + d + ", cap is " + std::to_string(slice.delay_cap_s) + " s", -1,
             ue.home_gnb, ue.id});
      }
    }
    report.users.push_back(um);
  }

  // Per-gNodeB accounting.
  for (const auto& g : sc.gnbs) {
    GnbMetrics gm;
    gm.gnb_id = g.id;
    gm.rbs_total = static_cast<int>(g.rb_ids.size());
    std::set<int> consumers;
    for (int rb : g.rb_ids) {
      auto it = rb_users.find(rb);
      if (it == rb_users.end() || it->second.empty()) continue;
      ++gm.rbs_used;
      consumers.insert(it->second.begin(), it->second.end());
    }
    gm.pool_consumers = static_cast<int>(consumers.size());
    for (const auto& ue : sc.users)
      if (ue.home_gnb == g.id && user_rbs.count(ue.id) && !user_rbs[ue.id].empty())
        ++gm.served_users;
    report.gnbs.push_back(gm);
  }

  report.feasible = true;
  for (auto& f : report.families) {
    f.pass = f.violations.empty();
    if (!f.pass) report.feasible = false;
  }
  return report;
}

nlohmann::json report_to_json(const VerificationReport& report) {
  nlohmann::json j;
  j["feasible"] = report.feasible;
  j["families"] = nlohmann::json::object();
  for (const auto& f : report.families) {
    nlohmann::json fj;
    fj["pass"] = f.pass;
    fj["violations"] = nlohmann::json::array();
    for (const auto& v : f.violations) {
      nlohmann::json vj;
      vj["detail"] = v.detail;
      if (v.rb >= 0) vj["rb"] = v.rb;
      if (v.gnb >= 0) vj["gnb"] = v.gnb;
      if (v.user >= 0) vj["user"] = v.user;
      fj["violations"].push_back(std::move(vj));
    }
    j["families"][f.family] = std::move(fj);
  }
  j["users"] = nlohmann::json::array();
  for (const auto& u : report.users) {
    nlohmann::json uj;
    uj["id"] = u.user_id;
    uj["slice"] = to_string(u.slice);
    uj["rate_bps"] = u.rate_bps;
    uj["delay_s"] = u.delay.stable ? nlohmann::json(u.delay.seconds) : nlohmann::json();
    uj["rbs"] = u.rbs_assigned;
    uj["borrowed"] = u.borrowed_rbs;
    uj["qos_ok"] = u.qos_ok;
    j["users"].push_back(std::move(uj));
  }
  j["gnbs"] = nlohmann::json::array();
  for (const auto& g : report.gnbs) {
    j["gnbs"].push_back({{"id", g.gnb_id},
                         {"served_users", g.served_users},
                         {"pool_consumers", g.pool_consumers},
                         {"rbs_used", g.rbs_used},
                         {"rbs_total", g.rbs_total}});
  }
  return j;
}

}  // namespace sliceopt
