#pragma once

// Shared helpers for the test binaries: fixture paths, the canonical
// scenarios used across suites, and a deterministic random-scenario
// generator.

#include <random>
#include <string>

#include "annulus/model.hpp"

namespace testsupport {

inline std::string fixture(const std::string& name) {
  return std::string(ANNULUS_FIXTURE_DIR) + "/" + name;
}

inline std::string scenario_file(const std::string& name) {
  return std::string(ANNULUS_SCENARIO_DIR) + "/" + name;
}

// Slack at the optimum: generous subsidy, revenue slope 1.
inline annulus::Scenario canonical_scenario() {
  annulus::Scenario s;
  s.value = annulus::FunctionalForm::log_saturating(10, 1);
  s.premium = annulus::FunctionalForm::log_saturating(2, 1);
  s.structuring_cost = annulus::FunctionalForm::power(0.5, 2);
  s.overlay_cost = annulus::FunctionalForm::affine(0, 0.3);
  s.revenue = annulus::FunctionalForm::affine(0, 1);
  s.subsidy = 100;
  s.r_max = 10;
  return s;
}

// Interior optimum with the budget constraint active.
inline annulus::Scenario binding_scenario() {
  annulus::Scenario s = canonical_scenario();
  s.revenue = annulus::FunctionalForm::affine(0, 0.5);
  s.subsidy = 2;
  return s;
}

// Marginal structuring cost below marginal width revenue: the frontier sits
// at the domain bound and the width is budget-determined.
inline annulus::Scenario frontier_scenario() {
  annulus::Scenario s;
  s.value = annulus::FunctionalForm::log_saturating(10, 1);
  s.premium = annulus::FunctionalForm::log_saturating(6, 1);
  s.structuring_cost = annulus::FunctionalForm::power(0.3, 1);
  s.overlay_cost = annulus::FunctionalForm::affine(0, 0.4);
  s.revenue = annulus::FunctionalForm::affine(0, 0.6);
  s.subsidy = 0.5;
  s.r_max = 10;
  return s;
}

// Constraint fails everywhere on the domain.
inline annulus::Scenario infeasible_scenario() {
  annulus::Scenario s = canonical_scenario();
  s.overlay_cost = annulus::FunctionalForm::affine(5, 1);
  s.revenue = annulus::FunctionalForm::affine(0, 0.1);
  s.subsidy = 0;
  return s;
}

// Valid random scenarios; `starve` biases toward a binding budget.
inline annulus::Scenario random_scenario(std::mt19937& rng, bool starve) {
  auto uni = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  using annulus::FunctionalForm;
  annulus::Scenario s;
  s.r_max = 10.0;
  if (rng() % 2 == 0)
    s.value = FunctionalForm::log_saturating(uni(5, 20), uni(0.5, 2));
  else
    s.value = FunctionalForm::power(uni(1.5, 5), uni(0.35, 0.85));
  s.premium = FunctionalForm::log_saturating(uni(1.5, 6), uni(0.5, 2));
  s.structuring_cost = FunctionalForm::power(uni(0.2, 1.2), uni(1.3, 2.5));
  s.overlay_cost = FunctionalForm::affine(uni(0, 0.5), uni(0.1, 0.8));
  if (rng() % 2 == 0)
    s.revenue = FunctionalForm::affine(0.0, uni(0.3, 1.5));
  else
    s.revenue = FunctionalForm::log_saturating(uni(1, 5), uni(0.3, 1));
  s.subsidy = starve ? uni(0.2, 3.0) : uni(20, 150);
  s.variant = (rng() % 2 == 0) ? annulus::ObjectiveVariant::welfare_plus_revenue
                               : annulus::ObjectiveVariant::welfare_only;
  return s;
}

}  // namespace testsupport
