#pragma once

#include <optional>

#include "annulus/forms.hpp"

namespace annulus {

// The maximized objective comes in two variants. welfare_plus_revenue adds
// the width revenue R(w) to the welfare sum, which is the objective whose
// constrained first-order conditions match the inner/outer boundary
// conditions verified by the solver; welfare_only maximizes the bare welfare
// sum and is kept for sensitivity analysis. Scenario files spell these
// "foc_consistent" and "literal_eq1" respectively.
enum class ObjectiveVariant { welfare_plus_revenue, welfare_only };

const char* variant_token(ObjectiveVariant variant);
std::optional<ObjectiveVariant> variant_from_token(std::string_view token);

struct SolverSettings {
  // Resolution of the oracle grid used to report oracle_gap; defaults to
  // r_max / 2000 when unset. Scenario files call this key grid_resolution.
  std::optional<double> oracle_resolution;
  double newton_tol = 1e-10;
  double feasibility_tol = 1e-8;

  bool operator==(const SolverSettings&) const = default;
};

// A complete model instance: the five functional forms, public subsidy,
// domain bound, objective variant and an optional exogenous width ceiling.
struct Scenario {
  FunctionalForm value;             // V(r_o)
  FunctionalForm premium;           // B(r_i)
  FunctionalForm structuring_cost;  // C(r_o)
  FunctionalForm overlay_cost;      // M(r_i)
  FunctionalForm revenue;           // R(w)
  double subsidy = 0.0;             // S >= 0
  double r_max = 10.0;
  ObjectiveVariant variant = ObjectiveVariant::welfare_plus_revenue;
  std::optional<double> width_cap;  // if set, w <= width_cap
  SolverSettings solver;

  bool operator==(const Scenario&) const = default;
};

// Boundary pair: openness boundary (inner) and structuring frontier (outer).
struct Boundaries {
  double inner = 0.0;  // r_i
  double outer = 0.0;  // r_o

  double width() const { return outer - inner; }
  bool operator==(const Boundaries&) const = default;
};

// Throws std::invalid_argument with a descriptive message if any invariant
// fails (including the five role shape checks over [0, r_max]).
void validate(const Scenario& scenario);
void validate(const Boundaries& b, double r_max);

struct WelfarePair {
  double welfare = 0.0;    // V(r_o) + B(r_i) - C(r_o) - M(r_i)
  double objective = 0.0;  // welfare, plus R(w) under welfare_plus_revenue
};

WelfarePair welfare(const Scenario& scenario, const Boundaries& b);

// R(w) + S - C(r_o) - M(r_i); the sustainability constraint holds iff >= 0.
double sustainability_slack(const Scenario& scenario, const Boundaries& b);

// True iff the slack is >= -tol and, when a width cap is set,
// w <= width_cap + tol. Does not throw; callers must pass valid boundaries.
bool is_feasible(const Scenario& scenario, const Boundaries& b, double tol);

// Effective oracle-grid resolution for this scenario.
double oracle_resolution(const Scenario& scenario);

}  // namespace annulus
