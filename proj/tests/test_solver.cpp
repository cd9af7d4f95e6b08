#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "annulus/solver.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace annulus;
using testsupport::binding_scenario;
using testsupport::canonical_scenario;
using testsupport::frontier_scenario;
using testsupport::infeasible_scenario;

namespace {

// Closed forms for the canonical scenario, derived by hand from the
// stationarity conditions and cross-checked by the grid oracle below.
const double kCanonInner = 2.0 / 1.3 - 1.0;
const double kCanonOuter = std::sqrt(11.0);
const double kCollapsePoint = (-1.3 + std::sqrt(48.49)) / 2.0;

}  // namespace

TEST_CASE("grid oracle finds the canonical optimum") {
  const Scenario s = canonical_scenario();
  const Solution g = grid_solve(s, 1e-3);
  CHECK(std::abs(g.point.inner - kCanonInner) <= 2e-3);
  CHECK(std::abs(g.point.outer - kCanonOuter) <= 2e-3);
  CHECK(g.shadow_price == 0.0);
  CHECK_FALSE(g.binding);
  CHECK(g.oracle_gap == 0.0);
  // The objective at the closed-form point agrees with the lattice maximum
  // to second order in the resolution.
  const double closed_form =
      welfare(s, {kCanonInner, kCanonOuter}).objective;
  CHECK(std::abs(closed_form - g.objective) <= 1e-6);
}

TEST_CASE("grid oracle honors the width cap") {
  Scenario s = binding_scenario();
  s.width_cap = 0.3;
  const Solution g = grid_solve(s, 0.01);
  CHECK(g.width <= 0.3 + 0.01);
  CHECK(g.active_bounds.width_cap);
}

TEST_CASE("grid oracle collapses to the origin when revenue is zero") {
  Scenario s = canonical_scenario();
  s.revenue = FunctionalForm::affine(0, 0);
  s.subsidy = 0;
  const Solution g = grid_solve(s, 0.05);
  CHECK(g.point.inner == 0.0);
  CHECK(g.point.outer == 0.0);
  CHECK(g.active_bounds.r_i_lower);
  CHECK(g.active_bounds.r_i_eq_r_o);
}

TEST_CASE("grid oracle reports infeasible scenarios") {
  CHECK_THROWS_AS(grid_solve(infeasible_scenario(), 0.05), InfeasibleScenario);
  CHECK_THROWS_AS(kkt_solve(infeasible_scenario()), InfeasibleScenario);
}

TEST_CASE("grid oracle rejects out-of-range resolutions") {
  const Scenario s = canonical_scenario();
  CHECK_THROWS_AS(grid_solve(s, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(grid_solve(s, 0.0), std::invalid_argument);
}

TEST_CASE("grid tie-breaking prefers larger r_i then smaller r_o") {
  // Both fixtures are built from dyadic parameters so every lattice
  // objective is exact and ties are genuine.
  Scenario s;
  s.value = FunctionalForm::affine(0, 0.5);
  s.premium = FunctionalForm::affine(0, 0.75);
  s.structuring_cost = FunctionalForm::power(1, 1);
  s.overlay_cost = FunctionalForm::affine(0, 0.25);
  s.revenue = FunctionalForm::affine(0, 0.5);
  s.r_max = 10;

  SUBCASE("objective flat everywhere: the most open feasible point wins") {
    s.subsidy = 10;  // slack boundary at r_i = r_o = 8
    const Solution g = grid_solve(s, 0.125);
    CHECK(g.point.inner == 8.0);
    CHECK(g.point.outer == 8.0);
  }
  SUBCASE("objective flat in r_o: smallest r_o among the tied maximizers") {
    s.premium = FunctionalForm::affine(0, 1.0);
    s.subsidy = 12;
    const Solution g = grid_solve(s, 0.125);
    CHECK(g.point.inner == 9.5);
    CHECK(g.point.outer == 9.5);
    CHECK(g.objective == doctest::Approx(0.25 * 9.5).epsilon(1e-15));
  }
}

TEST_CASE("kkt reproduces the canonical closed form") {
  const Solution sol = kkt_solve(canonical_scenario());
  CHECK(std::abs(sol.point.inner - kCanonInner) <= 1e-8);
  CHECK(std::abs(sol.point.outer - kCanonOuter) <= 1e-8);
  CHECK(sol.shadow_price == 0.0);
  CHECK_FALSE(sol.binding);
  CHECK_FALSE(sol.active_bounds.any());
  CHECK(sol.inner_residual <= 1e-6);
  CHECK(sol.outer_residual <= 1e-6);
  CHECK(sol.oracle_gap <= 1e-4);
  CHECK(sol.objective == welfare(canonical_scenario(), sol.point).objective);
}

TEST_CASE("welfare-only variant collapses to zero width") {
  Scenario s = canonical_scenario();
  s.variant = ObjectiveVariant::welfare_only;
  const Solution sol = kkt_solve(s);
  CHECK(sol.width == 0.0);
  CHECK(std::abs(sol.point.inner - kCollapsePoint) <= 1e-8);
  CHECK(std::abs(sol.point.outer - kCollapsePoint) <= 1e-8);
  CHECK(sol.active_bounds.r_i_eq_r_o);
  CHECK_FALSE(sol.binding);
}

TEST_CASE("starved scenario pins the openness boundary and prices the budget") {
  // With no subsidy and revenue slope 0.5 the only sustainable frontier on
  // the r_i = 0 axis is r_o = 1, and the budget shadow price follows from
  // the outer stationarity condition: 10/2 = (1+lambda) * (1 - 0.5).
  Scenario s = canonical_scenario();
  s.subsidy = 0;
  s.revenue = FunctionalForm::affine(0, 0.5);
  const Solution sol = kkt_solve(s);
  CHECK(sol.point.inner == doctest::Approx(0.0));
  CHECK(sol.point.outer == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.shadow_price == doctest::Approx(9.0).epsilon(1e-8));
  CHECK(sol.binding);
  CHECK(sol.active_bounds.r_i_lower);
  CHECK(std::abs(sustainability_slack(s, sol.point)) <= 1e-8);
}

TEST_CASE("canonical scenario at subsidy 1 sits on the corner closed form") {
  // r_o = 1 + sqrt(3) solves r_o + 1 = r_o^2 / 2; lambda follows from
  // 10/(1+r_o) = (1+lambda)(r_o - 1).
  Scenario s = canonical_scenario();
  s.subsidy = 1;
  const Solution sol = kkt_solve(s);
  const double ro = 1.0 + std::sqrt(3.0);
  const double lambda = 10.0 / (1.0 + ro) / (ro - 1.0) - 1.0;
  CHECK(sol.point.inner == doctest::Approx(0.0));
  CHECK(sol.point.outer == doctest::Approx(ro).epsilon(1e-10));
  CHECK(sol.shadow_price == doctest::Approx(lambda).epsilon(1e-8));
  CHECK(sol.binding);
  CHECK(sol.active_bounds.r_i_lower);
}

TEST_CASE("frontier-pinned scenario runs to the domain bound") {
  const Solution sol = kkt_solve(frontier_scenario());
  CHECK(sol.point.outer == doctest::Approx(10.0));
  CHECK(sol.point.inner == doctest::Approx(3.5).epsilon(1e-9));
  CHECK(sol.shadow_price == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(sol.binding);
  CHECK(sol.active_bounds.r_o_upper);
}

TEST_CASE("interior binding optimum satisfies the priced conditions") {
  const Scenario s = binding_scenario();
  const Solution sol = kkt_solve(s);
  CHECK(sol.binding);
  CHECK_FALSE(sol.active_bounds.any());
  CHECK(sol.shadow_price > 0.0);
  CHECK(std::abs(sustainability_slack(s, sol.point)) <= 1e-8);
  CHECK(sol.inner_residual <= 1e-6);
  CHECK(sol.outer_residual <= 1e-6);
  // Against the grid oracle at its stated tolerance.
  const Solution g = grid_solve(s, 1e-3);
  CHECK(std::abs(sol.objective - g.objective) <=
        1e-3 * (1.0 + std::abs(sol.objective)));
}

TEST_CASE("zero width cap forces a collapsed annulus") {
  Scenario s = canonical_scenario();
  s.width_cap = 0.0;
  const Solution sol = kkt_solve(s);
  CHECK(sol.width == 0.0);
  CHECK(sol.point.inner == sol.point.outer);
  CHECK(sol.active_bounds.width_cap);
}

TEST_CASE("width cap binds when below the free optimum") {
  Scenario s = binding_scenario();
  s.width_cap = 0.3;
  const Solution sol = kkt_solve(s);
  CHECK(sol.width == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(sol.active_bounds.width_cap);
  const Solution free_sol = kkt_solve(binding_scenario());
  CHECK(sol.point.outer < free_sol.point.outer);
}

TEST_CASE("shadow price is zero when the constraint is slack") {
  const Scenario s = canonical_scenario();
  const Solution sol = kkt_solve(s);
  const ShadowPriceResult sp = shadow_price(s, sol.point);
  CHECK(sp.lambda == 0.0);
  CHECK(sp.envelope_consistent);
}

TEST_CASE("shadow price matches the envelope derivative at interior binding optima") {
  const Scenario s = binding_scenario();
  const Solution sol = kkt_solve(s);
  REQUIRE(sol.binding);
  REQUIRE_FALSE(sol.active_bounds.any());
  const ShadowPriceResult sp = shadow_price(s, sol.point);
  CHECK(sp.lambda == doctest::Approx(sol.shadow_price).epsilon(1e-6));
  CHECK(sp.envelope_consistent);
  CHECK(std::abs(sp.lambda - sp.envelope_estimate) <=
        1e-3 * std::max(std::abs(sp.envelope_estimate), 1e-9));
}

TEST_CASE("shadow price flags corner optima where the joint fit breaks down") {
  // At the starved optimum (0, 1) the inner condition is held by the bound
  // multiplier, not by lambda, so the joint two-condition fit cannot match
  // the envelope derivative (which is 9 here). The inconsistency flag is
  // the signal that the active set was not interior.
  Scenario s = canonical_scenario();
  s.subsidy = 0;
  s.revenue = FunctionalForm::affine(0, 0.5);
  const Solution sol = kkt_solve(s);
  REQUIRE(sol.active_bounds.r_i_lower);
  const ShadowPriceResult sp = shadow_price(s, sol.point);
  CHECK_FALSE(sp.envelope_consistent);
  // Forward difference (S cannot go below 0) against a one-sided derivative
  // with slope d(lambda)/dS = -50 here: expect about 9 - 50*delta/2.
  CHECK(sp.envelope_estimate == doctest::Approx(9.0).epsilon(5e-3));
  // kkt_solve itself prices the budget from the correct active set.
  CHECK(sol.shadow_price == doctest::Approx(9.0).epsilon(1e-8));
}

TEST_CASE("negative shadow-price fits are clamped and flagged") {
  // A weak openness premium makes the joint fit negative at the pinned
  // origin, which signals a mis-classified active set.
  Scenario s = canonical_scenario();
  s.premium = FunctionalForm::log_saturating(0.2, 1);
  s.revenue = FunctionalForm::affine(0, 0);
  s.subsidy = 0;
  const ShadowPriceResult sp = shadow_price(s, {0, 0});
  CHECK(sp.lambda == 0.0);
  CHECK(sp.clamped);
}

TEST_CASE("foc residuals vanish at the optimum and not elsewhere") {
  const Scenario s = canonical_scenario();
  const FocResiduals at_opt =
      foc_residuals(s, {kCanonInner, kCanonOuter}, 0.0);
  CHECK(at_opt.inner <= 1e-5);
  CHECK(at_opt.outer <= 1e-5);
  const FocResiduals off = foc_residuals(s, {1, 2}, 0.0);
  CHECK((off.inner > 0.1 || off.outer > 0.1));
  CHECK_THROWS_AS(foc_residuals(s, {1, 2}, -1.0), std::domain_error);
}

TEST_CASE("randomized oracle equivalence and KKT invariants") {
  std::mt19937 rng(20240501);
  int binding_seen = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const Scenario s = testsupport::random_scenario(rng, trial % 2 == 0);
    validate(s);
    Solution sol;
    try {
      sol = kkt_solve(s);
    } catch (const InfeasibleScenario&) {
      continue;
    }
    CAPTURE(trial);
    CHECK(sol.point.inner <= sol.point.outer + 1e-12);
    CHECK(sol.point.inner >= 0.0);
    CHECK(sol.point.outer <= s.r_max + 1e-12);
    CHECK(sol.shadow_price >= 0.0);
    const double slack = sustainability_slack(s, sol.point);
    CHECK(sol.shadow_price * slack <= 1e-6);
    const Solution g = grid_solve(s, 0.01);
    CHECK(std::abs(sol.objective - g.objective) <=
          1e-2 * (1.0 + std::abs(sol.objective)));
    if (sol.binding) ++binding_seen;
  }
  CHECK(binding_seen >= 2);
}

TEST_CASE("solves are deterministic") {
  const Scenario s = binding_scenario();
  const Solution a = kkt_solve(s);
  const Solution b = kkt_solve(s);
  CHECK(a.point.inner == b.point.inner);
  CHECK(a.point.outer == b.point.outer);
  CHECK(a.shadow_price == b.shadow_price);
  CHECK(a.objective == b.objective);
}
