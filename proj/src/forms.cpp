#include "annulus/forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace annulus {

namespace {

constexpr double kShapeTol = 1e-12;

[[noreturn]] void bad_param(const std::string& msg) {
  throw std::invalid_argument("functional form: " + msg);
}

void check_domain(double r, double r_max) {
  if (!(r >= 0.0)) throw std::domain_error("form evaluated at r < 0");
  if (!(r <= r_max)) throw std::domain_error("form evaluated at r > r_max");
}

}  // namespace

FunctionalForm FunctionalForm::log_saturating(double a, double b) {
  FunctionalForm f{FormFamily::log_saturating, a, b};
  validate(f);
  return f;
}

FunctionalForm FunctionalForm::power(double c, double p) {
  FunctionalForm f{FormFamily::power, c, p};
  validate(f);
  return f;
}

FunctionalForm FunctionalForm::affine(double m0, double m1) {
  FunctionalForm f{FormFamily::affine, m0, m1};
  validate(f);
  return f;
}

void validate(const FunctionalForm& form) {
  if (!std::isfinite(form.p0) || !std::isfinite(form.p1))
    bad_param("parameters must be finite");
  switch (form.family) {
    case FormFamily::log_saturating:
      if (!(form.p0 > 0.0)) bad_param("log_saturating requires a > 0");
      if (!(form.p1 > 0.0)) bad_param("log_saturating requires b > 0");
      break;
    case FormFamily::power:
      if (!(form.p0 > 0.0)) bad_param("power requires c > 0");
      if (!(form.p1 > 0.0)) bad_param("power requires p > 0");
      break;
    case FormFamily::affine:
      if (!(form.p1 >= 0.0)) bad_param("affine requires m1 >= 0");
      break;
  }
}

double eval(const FunctionalForm& form, double r, double r_max) {
  check_domain(r, r_max);
  switch (form.family) {
    case FormFamily::log_saturating:
      return form.p0 * std::log1p(form.p1 * r);
    case FormFamily::power:
      return form.p0 * std::pow(r, form.p1);
    case FormFamily::affine:
      return form.p0 + form.p1 * r;
  }
  return 0.0;  // unreachable
}

double deriv(const FunctionalForm& form, double r, double r_max) {
  check_domain(r, r_max);
  switch (form.family) {
    case FormFamily::log_saturating:
      return form.p0 * form.p1 / (1.0 + form.p1 * r);
    case FormFamily::power: {
      const double p = form.p1;
      if (r == 0.0 && p < 1.0)
        throw std::domain_error("power derivative singular at r = 0 for p < 1");
      return form.p0 * p * std::pow(r, p - 1.0);
    }
    case FormFamily::affine:
      return form.p1;
  }
  return 0.0;  // unreachable
}

double deriv2(const FunctionalForm& form, double r, double r_max) {
  check_domain(r, r_max);
  switch (form.family) {
    case FormFamily::log_saturating: {
      const double d = 1.0 + form.p1 * r;
      return -form.p0 * form.p1 * form.p1 / (d * d);
    }
    case FormFamily::power: {
      const double p = form.p1;
      if (p == 1.0) return 0.0;
      if (r == 0.0 && p < 2.0)
        throw std::domain_error(
            "power second derivative singular at r = 0 for p < 2");
      return form.p0 * p * (p - 1.0) * std::pow(r, p - 2.0);
    }
    case FormFamily::affine:
      return 0.0;
  }
  return 0.0;  // unreachable
}

const char* family_name(FormFamily family) {
  switch (family) {
    case FormFamily::log_saturating: return "log_saturating";
    case FormFamily::power: return "power";
    case FormFamily::affine: return "affine";
  }
  return "?";
}

std::optional<FormFamily> family_from_name(std::string_view name) {
  if (name == "log_saturating") return FormFamily::log_saturating;
  if (name == "power") return FormFamily::power;
  if (name == "affine") return FormFamily::affine;
  return std::nullopt;
}

const char* role_name(FormRole role) {
  switch (role) {
    case FormRole::value: return "value";
    case FormRole::openness_premium: return "openness_premium";
    case FormRole::structuring_cost: return "structuring_cost";
    case FormRole::overlay_cost: return "overlay_cost";
    case FormRole::revenue: return "revenue";
  }
  return "?";
}

const char* param_name(FormFamily family, int index) {
  switch (family) {
    case FormFamily::log_saturating: return index == 0 ? "a" : "b";
    case FormFamily::power: return index == 0 ? "c" : "p";
    case FormFamily::affine: return index == 0 ? "m0" : "m1";
  }
  return "?";
}

int scale_param_index(FormFamily family) {
  return family == FormFamily::affine ? 1 : 0;
}

ShapeReport check_shape(const FunctionalForm& form, FormRole role,
                        double r_max, int n_samples) {
  validate(form);
  if (!(r_max > 0.0)) throw std::invalid_argument("check_shape: r_max must be > 0");
  if (n_samples < 3) throw std::invalid_argument("check_shape: n_samples must be >= 3");

  const bool want_concave = role == FormRole::value ||
                            role == FormRole::openness_premium ||
                            role == FormRole::revenue;
  const bool want_convex = role == FormRole::structuring_cost;
  const bool zero_at_origin =
      role == FormRole::structuring_cost || role == FormRole::revenue;

  std::vector<double> f(static_cast<size_t>(n_samples));
  const double step = r_max / static_cast<double>(n_samples - 1);
  for (int k = 0; k < n_samples; ++k) {
    const double r = std::min(k * step, r_max);
    f[static_cast<size_t>(k)] = eval(form, r, r_max);
    if (!std::isfinite(f[static_cast<size_t>(k)])) {
      return {false, ShapeViolation{"finite value", r, f[static_cast<size_t>(k)]}};
    }
  }

  if (zero_at_origin && std::abs(f[0]) > kShapeTol) {
    return {false,
            ShapeViolation{std::string(role_name(role)) + " requires f(0) = 0",
                           0.0, f[0]}};
  }
  if (role == FormRole::overlay_cost && f[0] < -kShapeTol) {
    return {false, ShapeViolation{"overlay_cost requires f(0) >= 0", 0.0, f[0]}};
  }

  for (int k = 0; k + 1 < n_samples; ++k) {
    const double d = f[static_cast<size_t>(k) + 1] - f[static_cast<size_t>(k)];
    if (d < -kShapeTol) {
      return {false, ShapeViolation{"increasing", std::min((k + 1) * step, r_max), d}};
    }
  }

  if (want_concave || want_convex) {
    for (int k = 0; k + 2 < n_samples; ++k) {
      const double s = f[static_cast<size_t>(k) + 2] -
                       2.0 * f[static_cast<size_t>(k) + 1] +
                       f[static_cast<size_t>(k)];
      if (want_concave && s > kShapeTol) {
        return {false,
                ShapeViolation{"concave", std::min((k + 1) * step, r_max), s}};
      }
      if (want_convex && s < -kShapeTol) {
        return {false,
                ShapeViolation{"convex", std::min((k + 1) * step, r_max), s}};
      }
    }
  }

  return {true, std::nullopt};
}

}  // namespace annulus
