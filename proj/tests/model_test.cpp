// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <limits>
#include <map>

#include <doctest.h>

#include "oracles.hpp"
#include "sliceopt/model.hpp"
#include "sliceopt/solvers.hpp"

using namespace sliceopt;

namespace {

Scenario fig2_scenario() {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = {9, 12, 11, 10};
  cfg.users_per_gnb = {8, 7, 6, 7};
  return generate_scenario(cfg, 1);
}

std::map<ConstraintFamily, int> family_counts(const ConstrainedModel& m) {
  std::map<ConstraintFamily, int> counts;
  for (const auto& c : m.constraints) ++counts[c.family];
  return counts;
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("qos rate floor") {
  SliceParams urllc{SliceKind::Urllc, 100.0, 120.0, 0.0, 10.0e-3};
  CHECK(qos_rate_floor(urllc) == 24000.0);

  // Numeric cross-check: the M/M/1 delay at the floor equals D_max. Solve
  // 1/(r/delta - lambda) = 0.01 by bisection and compare.
  double lo = 12000.0 + 1e-9, hi = 1e9;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double delay = 1.0 / (mid / 120.0 - 100.0);
    (delay > 0.01 ? lo : hi) = mid;
  }
  CHECK(0.5 * (lo + hi) == doctest::Approx(24000.0).epsilon(1e-9));

  // D_max -> infinity degrades to the queue-stability bound delta * lambda.
  SliceParams loose = urllc;
  loose.delay_cap_s = std::numeric_limits<double>::infinity();
  CHECK(qos_rate_floor(loose) == 12000.0);

  SliceParams embb{SliceKind::Embb, 100.0, 400.0, 100.0e3, 0.0};
  CHECK(qos_rate_floor(embb) == 100000.0);

  SliceParams bad = urllc;
  bad.delay_cap_s = 0.0;
  CHECK_THROWS_AS(qos_rate_floor(bad), std::domain_error);
}

TEST_CASE("documented instance dimensions") {
  const Scenario sc = fig2_scenario();
  const ConstrainedModel m = build_model(sc);
  CHECK(m.variables.size() == 1176);  // 42 x 28
  CHECK(m.num_rbs == 42);
  CHECK(m.num_users == 28);

  const auto counts = family_counts(m);
  CHECK(counts.at(ConstraintFamily::C1) == 28);
  CHECK(counts.at(ConstraintFamily::C2) == 42);
  // sum over gNodeBs of |K \ K_m| * |U_m| = 33*8 + 30*7 + 31*6 + 32*7
  CHECK(counts.at(ConstraintFamily::C3) == 884);
  CHECK(counts.at(ConstraintFamily::C4) + counts.at(ConstraintFamily::C5) == 28);

  for (double c : m.objective) CHECK(c > 0.0);
}

TEST_CASE("zero users still emits the RB rows") {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = {42};
  cfg.users_per_gnb = {0};
  const ConstrainedModel m = build_model(generate_scenario(cfg, 2));
  CHECK(m.variables.empty());
  const auto counts = family_counts(m);
  CHECK(counts.at(ConstraintFamily::C2) == 42);
  CHECK(counts.count(ConstraintFamily::C1) == 0);
  std::vector<uint8_t> empty;
  CHECK(m.objective_value(empty) == 0.0);
  CHECK(m.feasible(empty));
}

TEST_CASE("build is deterministic") {
  const Scenario sc = fig2_scenario();
  const ConstrainedModel a = build_model(sc);
  const ConstrainedModel b = build_model(sc);
  REQUIRE(a.variables.size() == b.variables.size());
  for (size_t i = 0; i < a.variables.size(); ++i) {
    CHECK(a.variables[i] == b.variables[i]);
    CHECK(a.objective[i] == b.objective[i]);  // bit-equal
  }
  REQUIRE(a.constraints.size() == b.constraints.size());
  for (size_t i = 0; i < a.constraints.size(); ++i) {
    CHECK(a.constraints[i].name == b.constraints[i].name);
    CHECK(a.constraints[i].rhs == b.constraints[i].rhs);
    REQUIRE(a.constraints[i].terms.size() == b.constraints[i].terms.size());
    for (size_t t = 0; t < a.constraints[i].terms.size(); ++t) {
      CHECK(a.constraints[i].terms[t].var == b.constraints[i].terms[t].var);
      CHECK(a.constraints[i].terms[t].coeff == b.constraints[i].terms[t].coeff);
    }
  }
}

TEST_CASE("relaxation keeps exactly the C1 and C2 rows") {
  const Scenario sc = fig2_scenario();
  const ConstrainedModel full = build_model(sc);
  const ConstrainedModel relaxed = relaxed_knapsack_model(sc);

  CHECK(relaxed.variables.size() == full.variables.size());
  for (size_t i = 0; i < full.objective.size(); ++i)
    CHECK(relaxed.objective[i] == full.objective[i]);

  std::vector<const LinearConstraint*> full_c12;
  for (const auto& c : full.constraints)
    if (c.family == ConstraintFamily::C1 || c.family == ConstraintFamily::C2)
      full_c12.push_back(&c);
  REQUIRE(relaxed.constraints.size() == full_c12.size());
  for (size_t i = 0; i < full_c12.size(); ++i) {
    CHECK(relaxed.constraints[i].name == full_c12[i]->name);
    CHECK(relaxed.constraints[i].rhs == full_c12[i]->rhs);
  }
}

TEST_CASE("every full-model feasible point satisfies the relaxation") {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = {3, 3};
  cfg.users_per_gnb = {2, 1};
  cfg.k_max = 2;
  const Scenario sc = generate_scenario(cfg, 11);
  const ConstrainedModel full = build_model(sc);
  const ConstrainedModel relaxed = relaxed_knapsack_model(sc);
  const int n = static_cast<int>(full.variables.size());
  REQUIRE(n <= 20);
  std::vector<uint8_t> x(n);
  for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
    for (int i = 0; i < n; ++i) x[i] = (mask >> i) & 1u;
    if (full.feasible(x)) CHECK(relaxed.feasible(x));
  }
}

TEST_CASE("delay linearization equivalence on a rate grid") {
  const SliceParams urllc{SliceKind::Urllc, 100.0, 120.0, 0.0, 10.0e-3};
  const double floor = qos_rate_floor(urllc);
  const int points = 10007;  // prime count keeps grid points off the boundary
  int checked = 0;
  for (int i = 0; i < points; ++i) {
    const double r = 10.0 * floor * static_cast<double>(i) / points;
    const bool linear_ok = r >= floor;
    const double service = r / urllc.packet_len_bits;
    const bool stable = service > urllc.packet_rate_pps;
    const bool direct_ok = stable && 1.0 / (service - urllc.packet_rate_pps) <= urllc.delay_cap_s;
    CHECK(linear_ok == direct_ok);
    ++checked;
  }
  CHECK(checked == points);
}

TEST_CASE("unreachable floors still build; infeasibility is the solver's verdict") {
  std::vector<oracle::ManualUser> users = {{0, 100.0, SliceKind::Embb}};
  Scenario sc = oracle::manual_scenario({2}, users, 2);
  sc.embb.rate_floor_bps = 1.0e12;  // far beyond what two RBs can deliver
  const ConstrainedModel m = build_model(sc);
  CHECK(!m.constraints.empty());  // emitted as-is, never softened
  const Solution sol = solve_exact(m);
  CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("wire json round trip") {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = {3, 2};
  cfg.users_per_gnb = {2, 2};
  const ConstrainedModel m = build_model(generate_scenario(cfg, 4));
  const ConstrainedModel back = model_from_json(model_to_json(m));
  REQUIRE(back.variables.size() == m.variables.size());
  for (size_t i = 0; i < m.variables.size(); ++i) {
    CHECK(back.variables[i] == m.variables[i]);
    CHECK(back.objective[i] == m.objective[i]);
  }
  REQUIRE(back.constraints.size() == m.constraints.size());
  for (size_t i = 0; i < m.constraints.size(); ++i) {
    CHECK(back.constraints[i].family == m.constraints[i].family);
    CHECK(back.constraints[i].sense == m.constraints[i].sense);
    CHECK(back.constraints[i].rhs == m.constraints[i].rhs);
    CHECK(back.constraints[i].terms.size() == m.constraints[i].terms.size());
  }
  CHECK(back.index_of(m.variables[3].rb, m.variables[3].user) == 3);
}

TEST_CASE("allocation round trip through bits") {
  ScenarioConfig cfg;
  cfg.rbs_per_gnb = {4};
  cfg.users_per_gnb = {3};
  const ConstrainedModel m = build_model(generate_scenario(cfg, 9));
  std::vector<uint8_t> x(m.variables.size(), 0);
  x[1] = x[5] = x[7] = 1;
  const Allocation alloc = m.to_allocation(x);
  CHECK(alloc.assigned.size() == 3);
  CHECK(m.to_bits(alloc) == x);

  Allocation bogus = alloc;
  bogus.assigned.push_back({999, 0, 0});
  CHECK_THROWS_AS(m.to_bits(bogus), std::invalid_argument);
}

TEST_SUITE_END();
