#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace annulus {

// One-dimensional parametric function families with closed-form first and
// second derivatives:
//
//   log_saturating(a, b):  a * ln(1 + b*r)      (a > 0, b > 0)
//   power(c, p):           c * r^p              (c > 0, p > 0)
//   affine(m0, m1):        m0 + m1*r            (m1 >= 0)
//
// A form plays one of five roles in a scenario; each role imposes shape
// requirements (monotonicity, curvature, boundary values) checked by
// check_shape via dense sampling.

enum class FormFamily { log_saturating, power, affine };

enum class FormRole {
  value,             // total value of structuring; increasing, concave
  openness_premium,  // extra welfare of open provision; increasing, concave
  structuring_cost,  // cost of frontier structuring; increasing, convex, 0 at 0
  overlay_cost,      // cost of the openness overlay; increasing, >= 0 at 0
  revenue,           // width revenue; increasing, concave or linear, 0 at 0
};

struct FunctionalForm {
  FormFamily family = FormFamily::affine;
  double p0 = 0.0;  // a | c | m0
  double p1 = 0.0;  // b | p | m1

  static FunctionalForm log_saturating(double a, double b);
  static FunctionalForm power(double c, double p);
  static FunctionalForm affine(double m0, double m1);

  bool operator==(const FunctionalForm&) const = default;
};

// Throws std::invalid_argument if the parameters violate the family rules.
void validate(const FunctionalForm& form);

// Evaluate the form at r. The domain is [0, r_max]; values outside it are a
// std::domain_error.
double eval(const FunctionalForm& form, double r, double r_max);

// Analytic first derivative. power with p < 1 is singular at r = 0
// (std::domain_error).
double deriv(const FunctionalForm& form, double r, double r_max);

// Analytic second derivative. power with p < 2 (and p != 1) is singular at
// r = 0.
double deriv2(const FunctionalForm& form, double r, double r_max);

const char* family_name(FormFamily family);
std::optional<FormFamily> family_from_name(std::string_view name);
const char* role_name(FormRole role);

// Parameter names as they appear in scenario files: ("a","b"), ("c","p"),
// ("m0","m1").
const char* param_name(FormFamily family, int index);

// Index of the multiplicative scale parameter: a (log_saturating),
// c (power), m1 (affine).
int scale_param_index(FormFamily family);

struct ShapeViolation {
  std::string requirement;  // which role requirement failed
  double r = 0.0;           // sample where it was detected
  double value = 0.0;       // offending difference or boundary value
};

struct ShapeReport {
  bool accepted = true;
  std::optional<ShapeViolation> violation;
};

// Samples the form on a uniform grid of n_samples points over [0, r_max]
// and tests the role requirements on first differences (monotonicity),
// second differences (curvature) and boundary values, tolerance 1e-12.
// Reports the first violation found.
ShapeReport check_shape(const FunctionalForm& form, FormRole role,
                        double r_max, int n_samples);

}  // namespace annulus
