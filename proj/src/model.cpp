// SPDX-License-Identifier: Apache-2.0
#include "sliceopt/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sliceopt {

std::string to_string(ConstraintFamily f) {
  switch (f) {
    case ConstraintFamily::C1: return "C1";
    case ConstraintFamily::C2: return "C2";
    case ConstraintFamily::C3: return "C3";
    case ConstraintFamily::C4: return "C4";
    case ConstraintFamily::C5: return "C5";
  }
  return "C?";
}

ConstraintFamily family_from_string(const std::string& s) {
  if (s == "C1") return ConstraintFamily::C1;
  if (s == "C2") return ConstraintFamily::C2;
  if (s == "C3") return ConstraintFamily::C3;
  if (s == "C4") return ConstraintFamily::C4;
  if (s == "C5") return ConstraintFamily::C5;
  throw std::invalid_argument("unknown constraint family: " + s);
}

std::string to_string(Sense s) { return s == Sense::LessEqual ? "<=" : ">="; }

Sense sense_from_string(const std::string& s) {
  if (s == "<=") return Sense::LessEqual;
  if (s == ">=") return Sense::GreaterEqual;
  throw std::invalid_argument("unknown constraint sense: " + s);
}

int ConstrainedModel::index_of(int rb_id, int user_id) const {
  auto r = rb_row.find(rb_id);
  auto u = user_col.find(user_id);
  if (r == rb_row.end() || u == user_col.end()) return -1;
  return r->second * num_users + u->second;
}

double ConstrainedModel::objective_value(std::span<const uint8_t> x) const {
  // Summed in sorted value order so that assignments selecting the same
  // multiset of coefficients (common among tied optima, since FSPL rates are
  // frequency-flat) produce bitwise-identical objectives.
  std::vector<double> chosen;
  chosen.reserve(variables.size());
  for (size_t i = 0; i < variables.size(); ++i)
    if (x[i]) chosen.push_back(objective[i]);
  std::sort(chosen.begin(), chosen.end());
  double total = 0.0;
  for (double c : chosen) total += c;
  return total;
}

double ConstrainedModel::constraint_lhs(const LinearConstraint& c, std::span<const uint8_t> x) const {
  double lhs = 0.0;
  for (const auto& t : c.terms)
    if (x[t.var]) lhs += t.coeff;
  return lhs;
}

bool ConstrainedModel::satisfied(const LinearConstraint& c, std::span<const uint8_t> x,
                                 double rel_tol) const {
  const double lhs = constraint_lhs(c, x);
  const double slack_tol = rel_tol * std::max(1.0, std::abs(c.rhs));
  return c.sense == Sense::LessEqual ? lhs <= c.rhs + slack_tol : lhs >= c.rhs - slack_tol;
}

bool ConstrainedModel::feasible(std::span<const uint8_t> x, double rel_tol) const {
  for (const auto& c : constraints)
    if (!satisfied(c, x, rel_tol)) return false;
  return true;
}

Allocation ConstrainedModel::to_allocation(std::span<const uint8_t> x) const {
  if (x.size() != variables.size())
    throw std::invalid_argument("to_allocation: assignment length mismatch");
  Allocation alloc;
  for (size_t i = 0; i < variables.size(); ++i)
    if (x[i]) alloc.assigned.push_back(variables[i]);
  return alloc;
}

std::vector<uint8_t> ConstrainedModel::to_bits(const Allocation& alloc) const {
  std::vector<uint8_t> x(variables.size(), 0);
  for (const auto& label : alloc.assigned) {
    const int idx = index_of(label.rb, label.user);
    if (idx < 0 || variables[idx] != label)
      throw std::invalid_argument("to_bits: allocation references an unknown variable");
    x[idx] = 1;
  }
  return x;
}

double qos_rate_floor(const SliceParams& slice) {
  if (slice.kind == SliceKind::Embb) return slice.rate_floor_bps;
  if (!(slice.delay_cap_s > 0.0)) throw std::domain_error("qos_rate_floor: D_max must be > 0");
  // Rate at which the M/M/1 delay equals D_max exactly; d <= D_max is
  // equivalent to r >= this floor on the stable region.
  return slice.packet_len_bits * (slice.packet_rate_pps + 1.0 / slice.delay_cap_s);
}

namespace {

ConstrainedModel build_impl(const Scenario& sc, bool relaxed) {
  sc.validate();

  ConstrainedModel m;
  m.scenario = std::make_shared<Scenario>(sc);

  const std::vector<int> rbs = sc.all_rb_ids();
  std::vector<int> user_ids;
  user_ids.reserve(sc.users.size());
  for (const auto& u : sc.users) user_ids.push_back(u.id);
  std::sort(user_ids.begin(), user_ids.end());

  m.num_rbs = static_cast<int>(rbs.size());
  m.num_users = static_cast<int>(user_ids.size());
  for (int i = 0; i < m.num_rbs; ++i) m.rb_row[rbs[i]] = i;
  for (int i = 0; i < m.num_users; ++i) m.user_col[user_ids[i]] = i;

  // Per-user rate (frequency-flat) and home gNodeB.
  std::vector<double> rate(user_ids.size());
  std::vector<int> home(user_ids.size());
  for (size_t u = 0; u < user_ids.size(); ++u) {
    const UserEquipment& ue = *sc.find_user(user_ids[u]);
    rate[u] = sc.user_rb_rate(ue);
    home[u] = ue.home_gnb;
  }

  m.variables.reserve(rbs.size() * user_ids.size());
  m.objective.reserve(rbs.size() * user_ids.size());
  for (int k : rbs) {
    for (size_t u = 0; u < user_ids.size(); ++u) {
      m.variables.push_back({k, home[u], user_ids[u]});
      m.objective.push_back(rate[u]);
    }
  }

  auto var = [&](int rb_id, int user_id) { return m.index_of(rb_id, user_id); };

  // C1: per user, at most k_max RBs.
  for (int uid : user_ids) {
    LinearConstraint c;
    c.family = ConstraintFamily::C1;
    c.name = "C1[user=" + std::to_string(uid) + "]";
    for (int k : rbs) c.terms.push_back({var(k, uid), 1.0});
    c.sense = Sense::LessEqual;
    c.rhs = sc.k_max;
    m.constraints.push_back(std::move(c));
  }

  // C2: each RB serves at most one user network-wide.
  for (int k : rbs) {
    LinearConstraint c;
    c.family = ConstraintFamily::C2;
    c.name = "C2[rb=" + std::to_string(k) + "]";
    for (int uid : user_ids) c.terms.push_back({var(k, uid), 1.0});
    c.sense = Sense::LessEqual;
    c.rhs = 1.0;
    m.constraints.push_back(std::move(c));
  }

  if (!relaxed) {
    // C3: user n of gNodeB m may take a foreign RB k' only once m's native
    // pool is fully allocated to m's own users:
    //   |K_m| * x_{k'mn} - sum_{n' in U_m} sum_{k in K_m} x_{kmn'} <= 0.
    for (const auto& g : sc.gnbs) {
      std::vector<int> pool_users;
      for (int uid : user_ids)
        if (home[m.user_col.at(uid)] == g.id) pool_users.push_back(uid);
      if (pool_users.empty()) continue;
      for (int kp : rbs) {
        if (std::find(g.rb_ids.begin(), g.rb_ids.end(), kp) != g.rb_ids.end()) continue;
        for (int uid : pool_users) {
          LinearConstraint c;
          c.family = ConstraintFamily::C3;
          c.name = "C3[gnb=" + std::to_string(g.id) + ",rb=" + std::to_string(kp) +
                   ",user=" + std::to_string(uid) + "]";
          c.terms.push_back({var(kp, uid), static_cast<double>(g.rb_ids.size())});
          for (int k : g.rb_ids)
            for (int nid : pool_users) c.terms.push_back({var(k, nid), -1.0});
          c.sense = Sense::LessEqual;
          c.rhs = 0.0;
          m.constraints.push_back(std::move(c));
        }
      }
    }

    // C4: eMBB rate floor. C5: URLLC delay cap as the equivalent rate floor.
    for (auto family : {ConstraintFamily::C4, ConstraintFamily::C5}) {
      const SliceKind kind = family == ConstraintFamily::C4 ? SliceKind::Embb : SliceKind::Urllc;
      const double floor = qos_rate_floor(sc.params_for(kind));
      for (int uid : user_ids) {
        const UserEquipment& ue = *sc.find_user(uid);
        if (ue.slice != kind) continue;
        LinearConstraint c;
        c.family = family;
        c.name = to_string(family) + "[user=" + std::to_string(uid) + "]";
        const double r = rate[m.user_col.at(uid)];
        for (int k : rbs) c.terms.push_back({var(k, uid), r});
        c.sense = Sense::GreaterEqual;
        c.rhs = floor;
        m.constraints.push_back(std::move(c));
      }
    }
  }

  return m;
}

}  // namespace

ConstrainedModel build_model(const Scenario& sc) { return build_impl(sc, false); }

ConstrainedModel relaxed_knapsack_model(const Scenario& sc) { return build_impl(sc, true); }

nlohmann::json model_to_json(const ConstrainedModel& m) {
  nlohmann::json j;
  j["variables"] = nlohmann::json::array();
  for (const auto& v : m.variables)
    j["variables"].push_back({{"rb", v.rb}, {"gnb", v.gnb}, {"user", v.user}});
  j["objective"] = nlohmann::json::array();
  for (size_t i = 0; i < m.objective.size(); ++i)
    j["objective"].push_back({static_cast<int>(i), m.objective[i]});
  j["constraints"] = nlohmann::json::array();
  for (const auto& c : m.constraints) {
    nlohmann::json cj;
    cj["family"] = to_string(c.family);
    cj["name"] = c.name;
    cj["terms"] = nlohmann::json::array();
    for (const auto& t : c.terms) cj["terms"].push_back({t.var, t.coeff});
    cj["sense"] = to_string(c.sense);
    cj["rhs"] = c.rhs;
    j["constraints"].push_back(std::move(cj));
  }
  return j;
}

ConstrainedModel model_from_json(const nlohmann::json& j) {
  ConstrainedModel m;
  for (const auto& vj : j.at("variables"))
    m.variables.push_back({vj.at("rb").get<int>(), vj.at("gnb").get<int>(), vj.at("user").get<int>()});
  m.objective.assign(m.variables.size(), 0.0);
  for (const auto& oj : j.at("objective")) {
    const int idx = oj.at(0).get<int>();
    if (idx < 0 || idx >= static_cast<int>(m.objective.size()))
      throw std::invalid_argument("model: objective index out of range");
    m.objective[idx] = oj.at(1).get<double>();
  }
  for (const auto& cj : j.at("constraints")) {
    LinearConstraint c;
    c.family = family_from_string(cj.at("family").get<std::string>());
    if (cj.contains("name")) c.name = cj.at("name").get<std::string>();
    for (const auto& tj : cj.at("terms")) {
      const int idx = tj.at(0).get<int>();
      if (idx < 0 || idx >= static_cast<int>(m.variables.size()))
        throw std::invalid_argument("model: constraint term index out of range");
      c.terms.push_back({idx, tj.at(1).get<double>()});
    }
    c.sense = sense_from_string(cj.at("sense").get<std::string>());
    c.rhs = cj.at("rhs").get<double>();
    m.constraints.push_back(std::move(c));
  }

  // Rebuild the dense (rb, user) indexing when the labels form a full grid in
  // the canonical (rb asc, user asc) layout.
  std::vector<int> rbs;
  std::vector<int> users;
  std::unordered_map<int, int> rb_seen;
  std::unordered_map<int, int> user_seen;
  for (const auto& v : m.variables) {
    if (rb_seen.emplace(v.rb, static_cast<int>(rbs.size())).second) rbs.push_back(v.rb);
    if (user_seen.emplace(v.user, static_cast<int>(users.size())).second) users.push_back(v.user);
  }
  if (!users.empty() && rbs.size() * users.size() == m.variables.size()) {
    m.num_rbs = static_cast<int>(rbs.size());
    m.num_users = static_cast<int>(users.size());
    m.rb_row = std::move(rb_seen);
    m.user_col = std::move(user_seen);
    for (size_t i = 0; i < m.variables.size(); ++i) {
      const auto& v = m.variables[i];
      if (m.index_of(v.rb, v.user) != static_cast<int>(i)) {
        m.rb_row.clear();
        m.user_col.clear();
        m.num_rbs = m.num_users = 0;
        break;
      }
    }
  }
  return m;
}

}  // namespace sliceopt
