#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "annulus/statics.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace annulus;
using testsupport::binding_scenario;
using testsupport::canonical_scenario;
using testsupport::frontier_scenario;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Feasible objective values in w order must rise at most once and fall at
// most once: sampled first differences change sign at most once.
bool single_peaked(const WelfareCurve& curve, double tol = 1e-9) {
  int sign = 0;
  int changes = 0;
  const CurvePoint* prev = nullptr;
  for (const CurvePoint& p : curve.points) {
    if (!p.feasible) continue;
    if (prev) {
      const double d = p.objective - prev->objective;
      if (std::abs(d) > tol) {
        const int s = d > 0 ? 1 : -1;
        if (sign != 0 && s != sign) ++changes;
        sign = s;
      }
    }
    prev = &p;
  }
  return changes <= 1 && (sign == 0 || sign < 0 || changes == 0);
}

}  // namespace

TEST_CASE("set_parameter addresses every scenario scalar") {
  Scenario s = canonical_scenario();
  set_parameter(s, "S", 7.0);
  CHECK(s.subsidy == 7.0);
  set_parameter(s, "width_cap", 1.5);
  CHECK(s.width_cap == 1.5);
  set_parameter(s, "width_cap", kInf);
  CHECK_FALSE(s.width_cap.has_value());
  set_parameter(s, "C.c", 0.7);
  CHECK(s.structuring_cost.p0 == 0.7);
  set_parameter(s, "V.b", 2.0);
  CHECK(s.value.p1 == 2.0);
  set_parameter(s, "M.m1", 0.4);
  CHECK(s.overlay_cost.p1 == 0.4);
  CHECK_THROWS_AS(set_parameter(s, "C.a", 1.0), std::invalid_argument);
  CHECK_THROWS_AS(set_parameter(s, "Q.c", 1.0), std::invalid_argument);
  CHECK_THROWS_AS(set_parameter(s, "r_maxx", 1.0), std::invalid_argument);
}

TEST_CASE("sweep spec validation") {
  CHECK_THROWS_AS(validate(SweepSpec{"S", {0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(SweepSpec{"S", {0, 1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(SweepSpec{"S", {0, 2, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(validate(SweepSpec{"S", {0, 1, kInf}}), std::invalid_argument);
  CHECK_NOTHROW(validate(SweepSpec{"width_cap", {0.1, 0.5, kInf}}));
  CHECK_NOTHROW(validate(SweepSpec{"S", {5, 3, 1}}));  // descending is fine
}

TEST_CASE("subsidy sweep returns one solution per value") {
  const Scenario s = canonical_scenario();
  const auto table = sweep(s, {"S", {0, 1, 5, 20, 100}});
  REQUIRE(table.size() == 5);
  for (const auto& p : table) CHECK(p.solution.has_value());
  // Once the constraint is slack the optimum no longer depends on S.
  CHECK(table[2].solution->width == doctest::Approx(table[4].solution->width));
  CHECK(table[3].solution->objective ==
        doctest::Approx(table[4].solution->objective));
  // Out of the starved corner the width grows with funding; the monotone
  // narrowing regime only starts once revenue is being displaced.
  CHECK(table[0].solution->width < table[2].solution->width);
}

TEST_CASE("sweeps record infeasible points instead of dropping them") {
  Scenario s = canonical_scenario();
  s.overlay_cost = FunctionalForm::affine(5, 1);  // fixed overlay floor
  s.revenue = FunctionalForm::affine(0, 0.1);
  const auto table = sweep(s, {"S", {0, 6, 60}});
  REQUIRE(table.size() == 3);
  CHECK_FALSE(table[0].solution.has_value());
  CHECK(table[1].solution.has_value());
  CHECK(table[2].solution.has_value());
}

TEST_CASE("sweeping into invalid parameters is an error") {
  const Scenario s = canonical_scenario();
  CHECK_THROWS_AS(sweep(s, {"C.c", {-1.0, 0.5, 1.0}}), std::invalid_argument);
}

TEST_CASE("sweeps are deterministic") {
  const Scenario s = binding_scenario();
  const auto a = sweep(s, {"S", {1.5, 2, 3}});
  const auto b = sweep(s, {"S", {1.5, 2, 3}});
  REQUIRE(a.size() == b.size());
  for (size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].solution->objective == b[k].solution->objective);
    CHECK(a[k].solution->point.inner == b[k].solution->point.inner);
    CHECK(a[k].solution->point.outer == b[k].solution->point.outer);
  }
}

TEST_CASE("P1 passes on the frontier-pinned fixture") {
  const auto report =
      check_prediction(frontier_scenario(), PredictionId::P1, {"C.c", {0.3, 0.4, 0.5}});
  CHECK(report.verdict == Verdict::pass);
  // Width expands exactly as the budget requires: w* = (S + 6 - 10c) / 1.0
  // plus the openness boundary shift; the closed-form optima are 6.5/7.5/8.5.
  REQUIRE(report.table.size() == 3);
  CHECK(report.table[0].solution->width == doctest::Approx(6.5).epsilon(1e-8));
  CHECK(report.table[2].solution->width == doctest::Approx(8.5).epsilon(1e-8));
}

TEST_CASE("P3 passes on the frontier-pinned fixture") {
  const auto report =
      check_prediction(frontier_scenario(), PredictionId::P3, {"C.c", {0.3, 0.4, 0.5}});
  CHECK(report.verdict == Verdict::pass);
  CHECK(report.table[0].solution->shadow_price ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("P2 passes on the interior binding fixture") {
  const auto report =
      check_prediction(binding_scenario(), PredictionId::P2, {"B.a", {1.5, 2, 3}});
  CHECK(report.verdict == Verdict::pass);
  CHECK(report.table.front().solution->width >
        report.table.back().solution->width);
}

TEST_CASE("P4 passes on the interior binding fixture in the funded regime") {
  const auto report = check_prediction(binding_scenario(), PredictionId::P4,
                                       {"S", {1.5, 2, 3, 5}});
  CHECK(report.verdict == Verdict::pass);
}

TEST_CASE("P1 fails on the interior binding fixture: the frontier retreats") {
  // When the frontier itself may shrink, raising the cost scale contracts
  // the whole system and the width narrows; the widening mechanism needs
  // a demand-pinned frontier.
  const auto report =
      check_prediction(binding_scenario(), PredictionId::P1, {"C.c", {0.5, 1, 2}});
  CHECK(report.verdict == Verdict::fail);
  CHECK(report.table.front().solution->width >
        report.table.back().solution->width);
}

TEST_CASE("a budget-pinned sweep with no width variation reports degenerate") {
  // With the premium scale high enough, the openness boundary is set by the
  // budget alone: every optimum sits on r_o_upper with the same width, so
  // a monotone verdict would be vacuous.
  const auto report = check_prediction(frontier_scenario(), PredictionId::P2,
                                       {"B.a", {5.5, 6.0, 7.0}});
  CHECK(report.verdict == Verdict::degenerate);
  CHECK(report.notes.find("no variation") != std::string::npos);
}

TEST_CASE("P5 passes on the binding fixture and degenerates on the slack one") {
  const auto binding_report = check_prediction(
      binding_scenario(), PredictionId::P5, {"width_cap", {0.3, 0.9, kInf}});
  CHECK(binding_report.verdict == Verdict::pass);

  const auto slack_report = check_prediction(
      canonical_scenario(), PredictionId::P5, {"width_cap", {0.3, 0.9, kInf}});
  CHECK(slack_report.verdict == Verdict::degenerate);
}

TEST_CASE("prediction/parameter mismatches are rejected") {
  CHECK_THROWS_AS(
      check_prediction(binding_scenario(), PredictionId::P4, {"C.c", {0.5, 1, 2}}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      check_prediction(binding_scenario(), PredictionId::P1, {"S", {1, 2, 3}}),
      std::invalid_argument);
}

TEST_CASE("welfare curve on the slack fixture is a clean inverted U") {
  const Scenario s = canonical_scenario();
  const WelfareCurve curve = welfare_curve(s, 1001);
  REQUIRE(curve.points.size() == 1001);
  for (const auto& p : curve.points) CHECK(p.feasible);
  REQUIRE(curve.peak.has_value());
  CHECK(std::abs(curve.peak->w - 2.778) <= 0.01);
  CHECK(single_peaked(curve));
  // Points come out ordered by width.
  for (size_t k = 0; k + 1 < curve.points.size(); ++k)
    CHECK(curve.points[k].w < curve.points[k + 1].w);
}

TEST_CASE("welfare curve on the binding fixture has a left shoulder") {
  const WelfareCurve curve = welfare_curve(binding_scenario(), 400);
  size_t first_feasible = curve.points.size();
  for (size_t k = 0; k < curve.points.size(); ++k) {
    if (curve.points[k].feasible) {
      first_feasible = k;
      break;
    }
  }
  REQUIRE(first_feasible > 0);                 // an infeasible region exists
  REQUIRE(first_feasible < curve.points.size());
  for (size_t k = 0; k < curve.points.size(); ++k)
    CHECK(curve.points[k].feasible == (k >= first_feasible));  // contiguous
  REQUIRE(curve.peak.has_value());
  CHECK(curve.peak->w == doctest::Approx(curve.points[first_feasible].w));
  CHECK(single_peaked(curve));
}

TEST_CASE("welfare curves are single-peaked across random scenarios") {
  std::mt19937 rng(20240229);
  int checked = 0;
  for (int trial = 0; trial < 8; ++trial) {
    const Scenario s = testsupport::random_scenario(rng, trial % 2 == 0);
    WelfareCurve curve;
    try {
      curve = welfare_curve(s, 301);
    } catch (const InfeasibleScenario&) {
      continue;
    }
    CAPTURE(trial);
    CHECK(single_peaked(curve));
    ++checked;
  }
  CHECK(checked >= 4);
}

TEST_CASE("welfare curve degenerates to one point when the frontier is zero") {
  Scenario s;
  s.value = FunctionalForm::log_saturating(0.1, 1);
  s.premium = FunctionalForm::log_saturating(0.1, 1);
  s.structuring_cost = FunctionalForm::power(1, 1);
  s.overlay_cost = FunctionalForm::affine(0, 0.5);
  s.revenue = FunctionalForm::affine(0, 0.3);
  s.subsidy = 5;
  s.r_max = 10;
  const WelfareCurve curve = welfare_curve(s, 50);
  REQUIRE(curve.points.size() == 1);
  CHECK(curve.points[0].w == 0.0);
  CHECK(curve.points[0].feasible);
}

TEST_CASE("welfare curve validates n_points") {
  CHECK_THROWS_AS(welfare_curve(canonical_scenario(), 5), std::invalid_argument);
}

TEST_CASE("subsidy threshold: collapse under the welfare-only variant") {
  Scenario s = binding_scenario();
  s.variant = ObjectiveVariant::welfare_only;
  const double w_tol = 1e-3;
  const double s_max = 10.0;
  const double s_star = subsidy_threshold(s, w_tol, s_max);
  CHECK(s_star > 0.0);
  CHECK(s_star < s_max);
  // Crossing property: collapsed at S*, not collapsed just below it.
  Scenario at = s;
  at.subsidy = s_star;
  CHECK(kkt_solve(at).width <= w_tol);
  at.subsidy = std::max(s_star - 2e-4 * s_max, 0.0);
  CHECK(kkt_solve(at).width > w_tol);
}

TEST_CASE("subsidy threshold: never reached when the slack width stays wide") {
  CHECK_THROWS_AS(subsidy_threshold(canonical_scenario(), 0.05, 200.0),
                  NotReached);
}

TEST_CASE("subsidy threshold: zero when the width is already collapsed") {
  Scenario s = canonical_scenario();
  s.revenue = FunctionalForm::affine(0, 0);  // no width revenue at all
  s.subsidy = 0;
  CHECK(subsidy_threshold(s, 1e-3, 1.0) == 0.0);
}

TEST_CASE("subsidy threshold preconditions") {
  CHECK_THROWS_AS(subsidy_threshold(canonical_scenario(), 0.0, 200.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(subsidy_threshold(canonical_scenario(), 0.1, 50.0),
                  std::invalid_argument);  // S_max below the scenario subsidy
}
