#include "annulus/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace annulus {

namespace {

constexpr int kShapeSamples = 201;

void check_role(const FunctionalForm& form, FormRole role, double r_max) {
  const ShapeReport report = check_shape(form, role, r_max, kShapeSamples);
  if (!report.accepted) {
    throw std::invalid_argument(std::string("scenario: form for role ") +
                                role_name(role) + " violates \"" +
                                report.violation->requirement + "\" near r = " +
                                std::to_string(report.violation->r));
  }
}

}  // namespace

const char* variant_token(ObjectiveVariant variant) {
  return variant == ObjectiveVariant::welfare_plus_revenue ? "foc_consistent"
                                                           : "literal_eq1";
}

std::optional<ObjectiveVariant> variant_from_token(std::string_view token) {
  if (token == "foc_consistent") return ObjectiveVariant::welfare_plus_revenue;
  if (token == "literal_eq1") return ObjectiveVariant::welfare_only;
  return std::nullopt;
}

void validate(const Scenario& scenario) {
  if (!(scenario.r_max > 0.0) || !std::isfinite(scenario.r_max))
    throw std::invalid_argument("scenario: r_max must be positive and finite");
  if (!(scenario.subsidy >= 0.0) || !std::isfinite(scenario.subsidy))
    throw std::invalid_argument("scenario: S must be >= 0 and finite");
  if (scenario.width_cap) {
    const double cap = *scenario.width_cap;
    if (!(cap >= 0.0) || !(cap <= scenario.r_max))
      throw std::invalid_argument("scenario: width_cap must lie in [0, r_max]");
  }
  if (scenario.solver.oracle_resolution) {
    const double res = *scenario.solver.oracle_resolution;
    if (!(res > 0.0) || !(res <= scenario.r_max / 10.0))
      throw std::invalid_argument(
          "scenario: grid_resolution must be in (0, r_max/10]");
  }
  if (!(scenario.solver.newton_tol > 0.0))
    throw std::invalid_argument("scenario: newton_tol must be > 0");
  if (!(scenario.solver.feasibility_tol >= 0.0))
    throw std::invalid_argument("scenario: feasibility_tol must be >= 0");

  check_role(scenario.value, FormRole::value, scenario.r_max);
  check_role(scenario.premium, FormRole::openness_premium, scenario.r_max);
  check_role(scenario.structuring_cost, FormRole::structuring_cost, scenario.r_max);
  check_role(scenario.overlay_cost, FormRole::overlay_cost, scenario.r_max);
  check_role(scenario.revenue, FormRole::revenue, scenario.r_max);
}

void validate(const Boundaries& b, double r_max) {
  if (!std::isfinite(b.inner) || !std::isfinite(b.outer))
    throw std::invalid_argument("boundaries must be finite");
  if (!(b.inner >= 0.0))
    throw std::invalid_argument("boundaries: r_i must be >= 0");
  if (!(b.inner <= b.outer))
    throw std::invalid_argument("boundaries: r_i must be <= r_o");
  if (!(b.outer <= r_max))
    throw std::invalid_argument("boundaries: r_o must be <= r_max");
}

WelfarePair welfare(const Scenario& scenario, const Boundaries& b) {
  validate(b, scenario.r_max);
  const double r_max = scenario.r_max;
  const double base = eval(scenario.value, b.outer, r_max) +
                      eval(scenario.premium, b.inner, r_max) -
                      eval(scenario.structuring_cost, b.outer, r_max) -
                      eval(scenario.overlay_cost, b.inner, r_max);
  double objective = base;
  if (scenario.variant == ObjectiveVariant::welfare_plus_revenue)
    objective += eval(scenario.revenue, b.width(), r_max);
  return {base, objective};
}

double sustainability_slack(const Scenario& scenario, const Boundaries& b) {
  validate(b, scenario.r_max);
  const double r_max = scenario.r_max;
  return eval(scenario.revenue, b.width(), r_max) + scenario.subsidy -
         eval(scenario.structuring_cost, b.outer, r_max) -
         eval(scenario.overlay_cost, b.inner, r_max);
}

bool is_feasible(const Scenario& scenario, const Boundaries& b, double tol) {
  const double r_max = scenario.r_max;
  const double slack = eval(scenario.revenue, b.width(), r_max) +
                       scenario.subsidy -
                       eval(scenario.structuring_cost, b.outer, r_max) -
                       eval(scenario.overlay_cost, b.inner, r_max);
  if (!(slack >= -tol)) return false;
  if (scenario.width_cap && !(b.width() <= *scenario.width_cap + tol))
    return false;
  return true;
}

double oracle_resolution(const Scenario& scenario) {
  return scenario.solver.oracle_resolution.value_or(scenario.r_max / 2000.0);
}

}  // namespace annulus
