// SPDX-License-Identifier: Apache-2.0
#include "sliceopt/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "sliceopt/radio.hpp"
#include "sliceopt/rng.hpp"

namespace sliceopt {

std::string to_string(SliceKind kind) { return kind == SliceKind::Urllc ? "urllc" : "embb"; }

SliceKind slice_kind_from_string(const std::string& s) {
  if (s == "urllc") return SliceKind::Urllc;
  if (s == "embb") return SliceKind::Embb;
  throw std::invalid_argument("unknown slice kind: " + s);
}

const GNodeB* Scenario::find_gnb(int id) const {
  for (const auto& g : gnbs)
    if (g.id == id) return &g;
  return nullptr;
}

const UserEquipment* Scenario::find_user(int id) const {
  for (const auto& u : users)
    if (u.id == id) return &u;
  return nullptr;
}

int Scenario::rb_owner(int rb_id) const {
  for (const auto& g : gnbs)
    if (std::find(g.rb_ids.begin(), g.rb_ids.end(), rb_id) != g.rb_ids.end()) return g.id;
  return -1;
}

std::vector<int> Scenario::all_rb_ids() const {
  std::vector<int> ids;
  for (const auto& g : gnbs) ids.insert(ids.end(), g.rb_ids.begin(), g.rb_ids.end());
  std::sort(ids.begin(), ids.end());
  return ids;
}

double Scenario::distance_to_home(const UserEquipment& ue) const {
  const GNodeB* g = find_gnb(ue.home_gnb);
  if (!g) throw std::invalid_argument("user references unknown gNodeB");
  return std::hypot(ue.x_m - g->x_m, ue.y_m - g->y_m);
}

double Scenario::user_rb_rate(const UserEquipment& ue) const {
  const GNodeB* g = find_gnb(ue.home_gnb);
  if (!g) throw std::invalid_argument("user references unknown gNodeB");
  const double gain = channel_gain_fspl(distance_to_home(ue), carrier_freq_hz);
  return per_rb_rate(rb_bandwidth_hz, g->tx_power_w, gain, noise_w);
}

void Scenario::validate() const {
  if (!(rb_bandwidth_hz > 0.0)) throw std::invalid_argument("scenario: rb_bandwidth must be > 0");
  if (!(noise_w > 0.0)) throw std::invalid_argument("scenario: noise power must be > 0");
  if (k_max < 1) throw std::invalid_argument("scenario: k_max must be >= 1");
  if (!(carrier_freq_hz > 0.0)) throw std::invalid_argument("scenario: carrier frequency must be > 0");
  if (urllc.kind != SliceKind::Urllc || embb.kind != SliceKind::Embb)
    throw std::invalid_argument("scenario: slice params carry the wrong kind");
  if (!(urllc.packet_rate_pps > 0.0) || !(urllc.packet_len_bits > 0.0) || !(urllc.delay_cap_s > 0.0))
    throw std::invalid_argument("scenario: urllc parameters must be positive");
  if (!(embb.packet_rate_pps > 0.0) || !(embb.packet_len_bits > 0.0) || !(embb.rate_floor_bps > 0.0))
    throw std::invalid_argument("scenario: embb parameters must be positive");

  std::set<int> gnb_ids;
  std::set<int> rb_ids;
  for (const auto& g : gnbs) {
    if (!gnb_ids.insert(g.id).second) throw std::invalid_argument("scenario: duplicate gNodeB id");
    if (!(g.coverage_radius_m > 0.0)) throw std::invalid_argument("scenario: coverage radius must be > 0");
    if (!(g.tx_power_w > 0.0)) throw std::invalid_argument("scenario: tx power must be > 0");
    for (int rb : g.rb_ids)
      if (!rb_ids.insert(rb).second) throw std::invalid_argument("scenario: RB pools are not disjoint");
  }
  std::set<int> user_ids;
  for (const auto& u : users) {
    if (!user_ids.insert(u.id).second) throw std::invalid_argument("scenario: duplicate user id");
    const GNodeB* g = find_gnb(u.home_gnb);
    if (!g) throw std::invalid_argument("scenario: user references unknown gNodeB");
    const double d = std::hypot(u.x_m - g->x_m, u.y_m - g->y_m);
    if (d > g->coverage_radius_m * (1.0 + 1e-12))
      throw std::invalid_argument("scenario: user outside its home gNodeB's coverage");
    if (d <= 0.0) throw std::invalid_argument("scenario: user placed on top of its gNodeB");
  }
}

Scenario generate_scenario(const ScenarioConfig& config, uint64_t seed) {
  const size_t n_gnbs = config.rbs_per_gnb.size();
  if (n_gnbs == 0) throw std::invalid_argument("generate_scenario: need at least one gNodeB");
  if (config.users_per_gnb.size() != n_gnbs)
    throw std::invalid_argument("generate_scenario: users_per_gnb size mismatch");
  for (int n : config.rbs_per_gnb)
    if (n < 0) throw std::invalid_argument("generate_scenario: negative RB count");
  for (int n : config.users_per_gnb)
    if (n < 0) throw std::invalid_argument("generate_scenario: negative user count");
  if (config.urllc_fraction < 0.0 || config.urllc_fraction > 1.0)
    throw std::invalid_argument("generate_scenario: urllc_fraction outside [0, 1]");
  if (config.k_max < 1) throw std::invalid_argument("generate_scenario: k_max must be >= 1");

  const double r = config.coverage_radius_m;
  const double w = config.area_width_m;
  const double h = config.area_height_m;
  if (!(r > 0.0)) throw std::invalid_argument("generate_scenario: coverage radius must be > 0");
  if (2.0 * r > w || 2.0 * r > h)
    throw std::invalid_argument("generate_scenario: coverage disc does not fit in the area");
  if (config.min_user_distance_m >= r)
    throw std::invalid_argument("generate_scenario: min user distance exceeds the coverage radius");

  Scenario sc;
  sc.seed = seed;
  sc.carrier_freq_hz = config.carrier_freq_hz;
  sc.rb_bandwidth_hz = config.rb_bandwidth_hz;
  sc.noise_w = dbm_to_watts(config.noise_dbm);
  sc.k_max = config.k_max;
  sc.urllc = config.urllc;
  sc.embb = config.embb;

  Rng rng(mix64(seed));

  // Jittered grid of cell centers inside [r, w - r] x [r, h - r], so that
  // every coverage disc stays inside the area.
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_gnbs))));
  const int rows = static_cast<int>(std::ceil(static_cast<double>(n_gnbs) / cols));
  const double usable_w = w - 2.0 * r;
  const double usable_h = h - 2.0 * r;
  const double cell_w = usable_w / cols;
  const double cell_h = usable_h / rows;
  const double tx_w = dbm_to_watts(config.tx_dbm);

  int next_rb = 0;
  for (size_t i = 0; i < n_gnbs; ++i) {
    const int col = static_cast<int>(i) % cols;
    const int row = static_cast<int>(i) / cols;
    const double jitter = 0.25 * std::min(cell_w, cell_h);
    double x = r + (col + 0.5) * cell_w + rng.uniform(-jitter, jitter);
    double y = r + (row + 0.5) * cell_h + rng.uniform(-jitter, jitter);
    x = std::clamp(x, r, w - r);
    y = std::clamp(y, r, h - r);

    GNodeB g;
    g.id = static_cast<int>(i);
    g.x_m = x;
    g.y_m = y;
    g.coverage_radius_m = r;
    g.tx_power_w = tx_w;
    g.rb_ids.resize(config.rbs_per_gnb[i]);
    for (int& rb : g.rb_ids) rb = next_rb++;
    sc.gnbs.push_back(std::move(g));
  }

  int next_user = 0;
  for (size_t i = 0; i < n_gnbs; ++i) {
    const GNodeB& g = sc.gnbs[i];
    const int n_users = config.users_per_gnb[i];
    const int n_urllc = static_cast<int>(std::llround(config.urllc_fraction * n_users));
    for (int u = 0; u < n_users; ++u) {
      double dist = 0.0;
      double theta = 0.0;
      do {
        dist = r * std::sqrt(rng.uniform01());
        theta = 2.0 * M_PI * rng.uniform01();
      } while (dist < config.min_user_distance_m);
      UserEquipment ue;
      ue.id = next_user++;
      ue.x_m = g.x_m + dist * std::cos(theta);
      ue.y_m = g.y_m + dist * std::sin(theta);
      ue.slice = u < n_urllc ? SliceKind::Urllc : SliceKind::Embb;
      ue.home_gnb = g.id;
      sc.users.push_back(ue);
    }
  }

  sc.validate();
  return sc;
}

namespace {

nlohmann::json slice_to_json(const SliceParams& p) {
  nlohmann::json j = {{"lambda_pps", p.packet_rate_pps}, {"delta_bits", p.packet_len_bits}};
  if (p.kind == SliceKind::Urllc)
    j["dmax_s"] = p.delay_cap_s;
  else
    j["rmin_bps"] = p.rate_floor_bps;
  return j;
}

SliceParams slice_from_json(const nlohmann::json& j, SliceKind kind) {
  SliceParams p;
  p.kind = kind;
  p.packet_rate_pps = j.at("lambda_pps").get<double>();
  p.packet_len_bits = j.at("delta_bits").get<double>();
  if (kind == SliceKind::Urllc)
    p.delay_cap_s = j.at("dmax_s").get<double>();
  else
    p.rate_floor_bps = j.at("rmin_bps").get<double>();
  return p;
}

}  // namespace

nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json j;
  j["version"] = 1;
  j["seed"] = sc.seed;
  j["carrier_freq_hz"] = sc.carrier_freq_hz;
  j["rb_bandwidth_hz"] = sc.rb_bandwidth_hz;
  j["noise_dbm"] = watts_to_dbm(sc.noise_w);
  j["k_max"] = sc.k_max;
  j["slices"] = {{"urllc", slice_to_json(sc.urllc)}, {"embb", slice_to_json(sc.embb)}};
  j["gnbs"] = nlohmann::json::array();
  for (const auto& g : sc.gnbs) {
    j["gnbs"].push_back({{"id", g.id},
                         {"x_m", g.x_m},
                         {"y_m", g.y_m},
                         {"radius_m", g.coverage_radius_m},
                         {"tx_dbm", watts_to_dbm(g.tx_power_w)},
                         {"rb_ids", g.rb_ids}});
  }
  j["users"] = nlohmann::json::array();
  for (const auto& u : sc.users) {
    j["users"].push_back({{"id", u.id},
                          {"x_m", u.x_m},
                          {"y_m", u.y_m},
                          {"slice", to_string(u.slice)},
                          {"home_gnb", u.home_gnb}});
  }
  return j;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  const int version = j.at("version").get<int>();
  if (version != 1) throw std::invalid_argument("scenario: unsupported document version");
  Scenario sc;
  sc.seed = j.at("seed").get<uint64_t>();
  sc.carrier_freq_hz = j.at("carrier_freq_hz").get<double>();
  sc.rb_bandwidth_hz = j.at("rb_bandwidth_hz").get<double>();
  sc.noise_w = dbm_to_watts(j.at("noise_dbm").get<double>());
  sc.k_max = j.at("k_max").get<int>();
  sc.urllc = slice_from_json(j.at("slices").at("urllc"), SliceKind::Urllc);
  sc.embb = slice_from_json(j.at("slices").at("embb"), SliceKind::Embb);
  for (const auto& gj : j.at("gnbs")) {
    GNodeB g;
    g.id = gj.at("id").get<int>();
    g.x_m = gj.at("x_m").get<double>();
    g.y_m = gj.at("y_m").get<double>();
    g.coverage_radius_m = gj.at("radius_m").get<double>();
    g.tx_power_w = dbm_to_watts(gj.at("tx_dbm").get<double>());
    g.rb_ids = gj.at("rb_ids").get<std::vector<int>>();
    sc.gnbs.push_back(std::move(g));
  }
  for (const auto& uj : j.at("users")) {
    UserEquipment u;
    u.id = uj.at("id").get<int>();
    u.x_m = uj.at("x_m").get<double>();
    u.y_m = uj.at("y_m").get<double>();
    u.slice = slice_kind_from_string(uj.at("slice").get<std::string>());
    u.home_gnb = uj.at("home_gnb").get<int>();
    sc.users.push_back(u);
  }
  sc.validate();
  return sc;
}

void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << scenario_to_json(sc).dump(2) << "\n";
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario: " + path);
  nlohmann::json j;
  in >> j;
  return scenario_from_json(j);
}

}  // namespace sliceopt
