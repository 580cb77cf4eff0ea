// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <set>

#include <doctest.h>

#include "sliceopt/radio.hpp"
#include "sliceopt/scenario.hpp"

using namespace sliceopt;

TEST_SUITE_BEGIN("scenario");

TEST_CASE("dbm conversion") {
  CHECK(dbm_to_watts(30.0) == 1.0);
  CHECK(dbm_to_watts(0.0) == doctest::Approx(1.0e-3).epsilon(1e-12));
  // Independent evaluation of 10^(-14.7) in extended precision.
  const double expected = static_cast<double>(std::pow(10.0L, -14.7L));
  CHECK(dbm_to_watts(-117.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(dbm_to_watts(-117.0) == doctest::Approx(1.9952623149688797e-15).epsilon(1e-3));
  CHECK(watts_to_dbm(dbm_to_watts(17.5)) == doctest::Approx(17.5).epsilon(1e-12));
}

TEST_CASE("fspl gain") {
  // Unit gain at d = lambda / (4 pi) by construction.
  const double f = 1.0e9;
  const double d_unit = (kSpeedOfLight / f) / (4.0 * M_PI);
  CHECK(channel_gain_fspl(d_unit, f) == doctest::Approx(1.0).epsilon(1e-12));

  // High-precision reference of (lambda / (4 pi d))^2 at n77.
  const long double lam = 3.0e8L / 3.7e9L;
  const auto ref = [&](long double d) {
    const long double r = lam / (4.0L * 3.14159265358979323846264338328L * d);
    return static_cast<double>(r * r);
  };
  CHECK(channel_gain_fspl(100.0, 3.7e9) == doctest::Approx(ref(100.0L)).epsilon(1e-9));
  CHECK(channel_gain_fspl(100.0, 3.7e9) == doctest::Approx(4.163e-9).epsilon(1e-3));
  CHECK(channel_gain_fspl(300.0, 3.7e9) == doctest::Approx(ref(300.0L)).epsilon(1e-9));
  CHECK(channel_gain_fspl(300.0, 3.7e9) == doctest::Approx(4.626e-10).epsilon(1e-3));

  CHECK_THROWS_AS(channel_gain_fspl(0.0, 3.7e9), std::domain_error);
  CHECK_THROWS_AS(channel_gain_fspl(-1.0, 3.7e9), std::domain_error);

  // Inverse-square law: gain * d^2 constant in d.
  const double base = channel_gain_fspl(1.0, 3.7e9);
  for (double d = 0.5; d < 2000.0; d *= 1.37) {
    CHECK(channel_gain_fspl(d, 3.7e9) * d * d == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("per-RB rate") {
  CHECK(per_rb_rate(180e3, 1.0, 0.0, 1e-15) == 0.0);
  CHECK(per_rb_rate(180e3, 0.0, 1e-9, 1e-15) == 0.0);
  // SNR exactly 1 gives exactly W.
  CHECK(per_rb_rate(180e3, 1.0, 2.5e-15, 2.5e-15) == 180e3);

  // Table-level reference composed from the two oracles above.
  const double gain = channel_gain_fspl(100.0, 3.7e9);
  const double noise = dbm_to_watts(-117.0);
  const long double snr = 1.0L * static_cast<long double>(gain) / static_cast<long double>(noise);
  const double expected = static_cast<double>(180000.0L * std::log2(1.0L + snr));
  const double got = per_rb_rate(180e3, 1.0, gain, noise);
  CHECK(got == doctest::Approx(expected).epsilon(1e-9));
  CHECK(got == doctest::Approx(3.779e6).epsilon(2e-3));

  // Monotone in gain.
  double prev = -1.0;
  for (double g = 0.0; g < 1e-6; g = g * 3.0 + 1e-14) {
    const double r = per_rb_rate(180e3, 1.0, g, noise);
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("generation hits the documented shape") {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = {9, 12, 11, 10};
  cfg.users_per_gnb = {8, 7, 6, 7};
  const Scenario sc = generate_scenario(cfg, 1);
  CHECK(sc.all_rb_ids().size() == 42);
  CHECK(sc.users.size() == 28);
  CHECK(sc.gnbs.size() == 4);
  CHECK(sc.k_max == 3);

  // Pools disjoint and globally complete.
  std::set<int> all;
  size_t total = 0;
  for (const auto& g : sc.gnbs) {
    total += g.rb_ids.size();
    all.insert(g.rb_ids.begin(), g.rb_ids.end());
  }
  CHECK(all.size() == total);
}

TEST_CASE("degenerate user count") {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = {5};
  cfg.users_per_gnb = {0};
  const Scenario sc = generate_scenario(cfg, 7);
  CHECK(sc.users.empty());
  CHECK(sc.all_rb_ids().size() == 5);
}

TEST_CASE("determinism per seed") {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = {6, 7};
  cfg.users_per_gnb = {5, 4};
  const Scenario a = generate_scenario(cfg, 42);
  const Scenario b = generate_scenario(cfg, 42);
  CHECK(scenario_to_json(a).dump() == scenario_to_json(b).dump());

  const Scenario c = generate_scenario(cfg, 43);
  CHECK(scenario_to_json(a).dump() != scenario_to_json(c).dump());
}

TEST_CASE("users stay inside their coverage disc") {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = {1, 1, 1, 1};
  cfg.users_per_gnb = {2500, 2500, 2500, 2500};
  const Scenario sc = generate_scenario(cfg, 99);
  REQUIRE(sc.users.size() == 10000);
  for (const auto& u : sc.users) {
    const double d = sc.distance_to_home(u);
    CHECK(d <= 300.0);
    CHECK(d >= 1.0);
  }
}

TEST_CASE("geometry that cannot fit is rejected") {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = {3};
  cfg.users_per_gnb = {2};
  cfg.coverage_radius_m = 600.0;  // disc diameter exceeds the 1 km area
  CHECK_THROWS_AS(generate_scenario(cfg, 1), std::invalid_argument);
}

TEST_CASE("json round trip") {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = {4, 3};
  cfg.users_per_gnb = {3, 2};
  cfg.urllc_fraction = 0.4;
  const Scenario sc = generate_scenario(cfg, 5);
  const auto j = scenario_to_json(sc);
  const Scenario back = scenario_from_json(j);
  CHECK(scenario_to_json(back).dump() == j.dump());
  CHECK(back.users.size() == sc.users.size());
  CHECK(back.noise_w == doctest::Approx(sc.noise_w).epsilon(1e-12));
}

TEST_CASE("unsupported document versions are rejected") {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = {2};
  cfg.users_per_gnb = {1};
  auto j = scenario_to_json(generate_scenario(cfg, 1));
  j["version"] = 99;
  CHECK_THROWS_AS(scenario_from_json(j), std::invalid_argument);
}

TEST_CASE("slice mix follows the requested fraction") {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = {10};
  cfg.users_per_gnb = {10};
  cfg.urllc_fraction = 0.3;
  const Scenario sc = generate_scenario(cfg, 3);
  int urllc = 0;
  for (const auto& u : sc.users)
    if (u.slice == SliceKind::Urllc) ++urllc;
  CHECK(urllc == 3);
}

TEST_SUITE_END();
