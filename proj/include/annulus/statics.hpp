#pragma once

#include <optional>
#include <string>
#include <vector>

#include "annulus/solver.hpp"

namespace annulus {

// One scenario scalar addressed by path: "S", "width_cap", or
// "<form>.<param>" where <form> is V/B/C/M/R and <param> is the family's
// parameter name (a/b, c/p, m0/m1). For width_cap the value +infinity means
// "uncapped".
void set_parameter(Scenario& scenario, std::string_view path, double value);

struct SweepSpec {
  std::string parameter_path;
  std::vector<double> values;  // length >= 3, strictly monotone
};

// Throws std::invalid_argument on a malformed spec.
void validate(const SweepSpec& spec);

struct SweepPoint {
  double value = 0.0;
  std::optional<Solution> solution;  // empty when the point is infeasible
};

// One kkt_solve per swept value, scenario otherwise unchanged. Infeasible
// points are recorded, not dropped. Each swept scenario must pass scenario
// validation.
std::vector<SweepPoint> sweep(const Scenario& scenario, const SweepSpec& spec);

enum class PredictionId { P1, P2, P3, P4, P5 };
enum class Verdict { pass, fail, degenerate };

const char* prediction_name(PredictionId id);
std::optional<PredictionId> prediction_from_name(std::string_view name);
const char* verdict_name(Verdict verdict);

struct PredictionReport {
  PredictionId id = PredictionId::P1;
  Verdict verdict = Verdict::fail;
  std::vector<SweepPoint> table;
  std::string notes;
};

// Mechanical check of one qualitative prediction over a sweep, with weak
// monotonicity tested at slack 1e-6:
//   P1: w* weakly increasing in C's scale parameter.
//   P2: w* weakly decreasing in B's scale parameter.
//   P3: lambda weakly decreasing and r_i* weakly increasing as C's scale
//       decreases.
//   P4: w* weakly decreasing in S.
//   P5: on a base scenario whose constraint binds, r_o* under the smallest
//       width cap is strictly below the uncapped r_o*; degenerate when the
//       base constraint is slack.
// The spec must sweep the parameter the prediction concerns.
PredictionReport check_prediction(const Scenario& scenario, PredictionId id,
                                  const SweepSpec& spec);

struct CurvePoint {
  double w = 0.0;
  double welfare = 0.0;
  double objective = 0.0;
  bool feasible = false;  // sustainability constraint only
};

struct WelfareCurve {
  std::vector<CurvePoint> points;       // ordered by increasing w
  std::optional<CurvePoint> peak;       // feasible maximizer of the objective
  Solution base;                        // the solve that fixed r_o
};

// Welfare as a function of width with the outer boundary held at its
// optimal level: r_i sweeps n_points uniform values in [0, r_o*].
WelfareCurve welfare_curve(const Scenario& scenario, int n_points);

// Subsidy alone cannot push the optimal width below w_tol by S_max.
struct NotReached : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Smallest subsidy at which the optimal width drops to w_tol, located by
// bisection over [0, S_max] to absolute precision 1e-4 * S_max. Subsidies
// that make the scenario infeasible count as "width above tolerance".
double subsidy_threshold(const Scenario& scenario, double w_tol, double S_max);

}  // namespace annulus
