#pragma once

#include <stdexcept>
#include <string>

#include "annulus/model.hpp"

namespace annulus {

// No point of the search lattice satisfies the sustainability constraint
// (and the width cap, when present).
struct InfeasibleScenario : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Newton failed to converge after the active-set reclassification retries.
struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Which boundary constraints are active at a solution. The sustainability
// constraint itself is tracked separately by Solution::binding.
struct ActiveBounds {
  bool r_i_lower = false;   // r_i = 0
  bool r_i_eq_r_o = false;  // r_i = r_o (zero width)
  bool r_o_upper = false;   // r_o = r_max
  bool width_cap = false;   // w = width_cap

  bool any() const { return r_i_lower || r_i_eq_r_o || r_o_upper || width_cap; }
  bool operator==(const ActiveBounds&) const = default;
};

// Wire form: semicolon-joined bound names in declaration order, "" if none.
std::string to_string(const ActiveBounds& bounds);

struct Solution {
  Boundaries point;             // (r_i*, r_o*)
  double width = 0.0;           // w* = r_o* - r_i*
  double shadow_price = 0.0;    // lambda >= 0
  double welfare = 0.0;         // welfare sum at the optimum
  double objective = 0.0;       // variant objective at the optimum
  bool binding = false;         // sustainability constraint active
  ActiveBounds active_bounds;
  double inner_residual = 0.0;  // |B'(r_i) - (1+lambda)(M'(r_i) + R'(w))|
  double outer_residual = 0.0;  // |V'(r_o) - (1+lambda)(C'(r_o) - R'(w))|
  double oracle_gap = 0.0;      // |objective - grid optimum|
};

// Exhaustive search over the triangular lattice
// {(r_i, r_o) : 0 <= r_i <= r_o <= r_max, step = resolution}, keeping only
// feasible points. Ties are broken toward larger r_i, then smaller r_o,
// independently of evaluation order. The shadow price is estimated by
// re-solving at S + delta, delta = max(1e-3, 1e-3*S).
// Throws InfeasibleScenario when no lattice point is feasible, and
// std::invalid_argument when resolution > r_max/10.
Solution grid_solve(const Scenario& scenario, double resolution);

// Active-set Newton solver. Seeds from a coarse grid (resolution r_max/200),
// classifies the active constraints, and iterates damped Newton on the
// corresponding stationarity system until the step norm drops below
// newton_tol (at most 100 iterations), reclassifying on inconsistent
// multipliers or violated constraints (at most 4 retries). oracle_gap is
// measured against a grid at the scenario's oracle resolution
// (default r_max/2000).
Solution kkt_solve(const Scenario& scenario);

struct ShadowPriceResult {
  double lambda = 0.0;
  bool clamped = false;             // least-squares fit was negative
  bool envelope_consistent = true;  // matches d(objective*)/dS within 1e-3 rel
  double envelope_estimate = 0.0;
};

// Shadow price of the sustainability constraint at a (near-)optimal point:
// 0 when the constraint is slack, otherwise the nonnegative least-squares
// fit of lambda to both first-order conditions, cross-checked against the
// finite-difference derivative of the optimal objective with respect to S.
ShadowPriceResult shadow_price(const Scenario& scenario, const Boundaries& at);

struct FocResiduals {
  double inner = 0.0;
  double outer = 0.0;
};

// Absolute first-order-condition errors at (b, lambda). Throws
// std::domain_error for lambda < 0.
FocResiduals foc_residuals(const Scenario& scenario, const Boundaries& b,
                           double lambda);

}  // namespace annulus
