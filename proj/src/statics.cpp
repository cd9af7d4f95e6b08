#include "annulus/statics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace annulus {

namespace {

constexpr double kMonotoneSlack = 1e-6;
constexpr double kFlatTol = 1e-9;

FunctionalForm* form_by_key(Scenario& s, std::string_view key) {
  if (key == "V") return &s.value;
  if (key == "B") return &s.premium;
  if (key == "C") return &s.structuring_cost;
  if (key == "M") return &s.overlay_cost;
  if (key == "R") return &s.revenue;
  return nullptr;
}

// Ascending-by-value view of a sweep table; sweeps accept either direction.
std::vector<const SweepPoint*> ascending(const std::vector<SweepPoint>& table) {
  std::vector<const SweepPoint*> v;
  v.reserve(table.size());
  for (const auto& p : table) v.push_back(&p);
  std::sort(v.begin(), v.end(), [](const SweepPoint* a, const SweepPoint* b) {
    return a->value < b->value;
  });
  return v;
}

bool weakly_increasing(const std::vector<double>& xs) {
  for (size_t k = 0; k + 1 < xs.size(); ++k)
    if (xs[k + 1] < xs[k] - kMonotoneSlack) return false;
  return true;
}

bool weakly_decreasing(const std::vector<double>& xs) {
  for (size_t k = 0; k + 1 < xs.size(); ++k)
    if (xs[k + 1] > xs[k] + kMonotoneSlack) return false;
  return true;
}

bool flat(const std::vector<double>& xs) {
  if (xs.empty()) return true;
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  return *hi - *lo <= kFlatTol;
}

std::string scale_path(const Scenario& s, std::string_view form_key) {
  Scenario tmp = s;
  const FunctionalForm* f = form_by_key(tmp, form_key);
  const int idx = scale_param_index(f->family);
  return std::string(form_key) + "." + param_name(f->family, idx);
}

}  // namespace

void set_parameter(Scenario& scenario, std::string_view path, double value) {
  if (path == "S") {
    scenario.subsidy = value;
    return;
  }
  if (path == "width_cap") {
    if (std::isinf(value) && value > 0.0)
      scenario.width_cap.reset();
    else
      scenario.width_cap = value;
    return;
  }
  const size_t dot = path.find('.');
  if (dot != std::string_view::npos) {
    const std::string_view form_key = path.substr(0, dot);
    const std::string_view pname = path.substr(dot + 1);
    FunctionalForm* form = form_by_key(scenario, form_key);
    if (form) {
      if (pname == param_name(form->family, 0)) {
        form->p0 = value;
        return;
      }
      if (pname == param_name(form->family, 1)) {
        form->p1 = value;
        return;
      }
    }
  }
  throw std::invalid_argument("unknown parameter path: " + std::string(path));
}

void validate(const SweepSpec& spec) {
  if (spec.values.size() < 3)
    throw std::invalid_argument("sweep: need at least 3 values");
  bool inc = true, dec = true;
  for (size_t k = 0; k + 1 < spec.values.size(); ++k) {
    if (!(spec.values[k] < spec.values[k + 1])) inc = false;
    if (!(spec.values[k] > spec.values[k + 1])) dec = false;
  }
  if (!inc && !dec)
    throw std::invalid_argument("sweep: values must be strictly monotone");
  for (double v : spec.values) {
    if (std::isnan(v)) throw std::invalid_argument("sweep: values must not be NaN");
    if (std::isinf(v) && spec.parameter_path != "width_cap")
      throw std::invalid_argument(
          "sweep: infinite values are only meaningful for width_cap");
  }
}

std::vector<SweepPoint> sweep(const Scenario& scenario, const SweepSpec& spec) {
  validate(spec);
  std::vector<SweepPoint> table;
  table.reserve(spec.values.size());
  for (double v : spec.values) {
    Scenario sc = scenario;
    set_parameter(sc, spec.parameter_path, v);
    validate(sc);
    SweepPoint point;
    point.value = v;
    try {
      point.solution = kkt_solve(sc);
    } catch (const InfeasibleScenario&) {
      point.solution = std::nullopt;
    }
    table.push_back(std::move(point));
  }
  return table;
}

PredictionReport check_prediction(const Scenario& scenario, PredictionId id,
                                  const SweepSpec& spec) {
  std::string expected_path;
  switch (id) {
    case PredictionId::P1:
    case PredictionId::P3: expected_path = scale_path(scenario, "C"); break;
    case PredictionId::P2: expected_path = scale_path(scenario, "B"); break;
    case PredictionId::P4: expected_path = "S"; break;
    case PredictionId::P5: expected_path = "width_cap"; break;
  }
  if (spec.parameter_path != expected_path) {
    throw std::invalid_argument(std::string("prediction ") +
                                prediction_name(id) + " must sweep " +
                                expected_path + ", not " + spec.parameter_path);
  }

  PredictionReport report;
  report.id = id;
  report.table = sweep(scenario, spec);

  const auto order = ascending(report.table);
  std::vector<const Solution*> sols;
  size_t infeasible = 0;
  for (const SweepPoint* p : order) {
    if (p->solution) sols.push_back(&*p->solution);
    else ++infeasible;
  }
  if (infeasible > 0)
    report.notes += std::to_string(infeasible) + " swept point(s) infeasible; ";

  if (id == PredictionId::P5) {
    Scenario uncapped = scenario;
    uncapped.width_cap.reset();
    const Solution base = kkt_solve(uncapped);
    if (!base.binding) {
      report.verdict = Verdict::degenerate;
      report.notes +=
          "sustainability constraint is slack at the uncapped optimum; a "
          "width cap cannot starve frontier investment";
      return report;
    }
    const Solution* smallest_capped = nullptr;
    double smallest_cap = std::numeric_limits<double>::infinity();
    for (const SweepPoint* p : order) {
      if (!p->solution || std::isinf(p->value)) continue;
      if (p->value < smallest_cap) {
        smallest_cap = p->value;
        smallest_capped = &*p->solution;
      }
    }
    if (!smallest_capped) {
      report.verdict = Verdict::degenerate;
      report.notes += "no feasible capped optimum to compare";
      return report;
    }
    const bool stalls =
        smallest_capped->point.outer < base.point.outer - kMonotoneSlack;
    report.verdict = stalls ? Verdict::pass : Verdict::fail;
    report.notes += "uncapped r_o = " + std::to_string(base.point.outer) +
                    ", r_o under cap " + std::to_string(smallest_cap) + " = " +
                    std::to_string(smallest_capped->point.outer);
    return report;
  }

  if (sols.size() < 2) {
    report.verdict = Verdict::degenerate;
    report.notes += "fewer than two feasible optima; nothing to compare";
    return report;
  }

  std::vector<double> widths, lambdas, inners;
  for (const Solution* s : sols) {
    widths.push_back(s->width);
    lambdas.push_back(s->shadow_price);
    inners.push_back(s->point.inner);
  }

  // A sweep whose optima all sit on one identical bound with no movement in
  // the tracked quantity has no variation left to test.
  bool same_bound = sols.front()->active_bounds.any();
  for (const Solution* s : sols)
    same_bound = same_bound && s->active_bounds == sols.front()->active_bounds;

  bool ok = false;
  bool tracked_flat = false;
  switch (id) {
    case PredictionId::P1:
      ok = weakly_increasing(widths);
      tracked_flat = flat(widths);
      break;
    case PredictionId::P2:
      ok = weakly_decreasing(widths);
      tracked_flat = flat(widths);
      break;
    case PredictionId::P3:
      // Ascending in C's scale: lambda weakly up, r_i weakly down, i.e. the
      // stated directions as the scale decreases.
      ok = weakly_increasing(lambdas) && weakly_decreasing(inners);
      tracked_flat = flat(lambdas) && flat(inners);
      break;
    case PredictionId::P4:
      ok = weakly_decreasing(widths);
      tracked_flat = flat(widths);
      break;
    case PredictionId::P5:
      break;  // handled above
  }

  if (same_bound && tracked_flat) {
    report.verdict = Verdict::degenerate;
    report.notes += "all swept optima sit on active bound(s) " +
                    to_string(sols.front()->active_bounds) +
                    " with no variation in the tracked quantity";
    return report;
  }
  report.verdict = ok ? Verdict::pass : Verdict::fail;
  return report;
}

const char* prediction_name(PredictionId id) {
  switch (id) {
    case PredictionId::P1: return "P1";
    case PredictionId::P2: return "P2";
    case PredictionId::P3: return "P3";
    case PredictionId::P4: return "P4";
    case PredictionId::P5: return "P5";
  }
  return "?";
}

std::optional<PredictionId> prediction_from_name(std::string_view name) {
  if (name == "P1") return PredictionId::P1;
  if (name == "P2") return PredictionId::P2;
  if (name == "P3") return PredictionId::P3;
  if (name == "P4") return PredictionId::P4;
  if (name == "P5") return PredictionId::P5;
  return std::nullopt;
}

const char* verdict_name(Verdict verdict) {
  switch (verdict) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::degenerate: return "degenerate";
  }
  return "?";
}

WelfareCurve welfare_curve(const Scenario& scenario, int n_points) {
  if (n_points < 10)
    throw std::invalid_argument("welfare_curve: n_points must be >= 10");
  WelfareCurve curve;
  curve.base = kkt_solve(scenario);
  const double ro = curve.base.point.outer;
  const double ftol = scenario.solver.feasibility_tol;

  auto add_point = [&](double w) {
    const double ri = std::max(ro - w, 0.0);
    const Boundaries b{ri, ro};
    const WelfarePair wp = welfare(scenario, b);
    const double slack = sustainability_slack(scenario, b);
    curve.points.push_back({w, wp.welfare, wp.objective, slack >= -ftol});
  };

  if (ro <= 0.0) {
    add_point(0.0);
  } else {
    for (int k = 0; k < n_points; ++k) {
      const double w = ro * static_cast<double>(k) /
                       static_cast<double>(n_points - 1);
      add_point(std::min(w, ro));
    }
  }

  for (const CurvePoint& p : curve.points) {
    if (!p.feasible) continue;
    if (!curve.peak || p.objective > curve.peak->objective) curve.peak = p;
  }
  return curve;
}

double subsidy_threshold(const Scenario& scenario, double w_tol, double S_max) {
  if (!(w_tol > 0.0)) throw std::invalid_argument("subsidy_threshold: w_tol must be > 0");
  if (!(S_max > scenario.subsidy))
    throw std::invalid_argument("subsidy_threshold: S_max must exceed the scenario subsidy");

  auto width_at = [&](double s_value) -> std::optional<double> {
    Scenario sc = scenario;
    sc.subsidy = s_value;
    try {
      return kkt_solve(sc).width;
    } catch (const InfeasibleScenario&) {
      return std::nullopt;  // no annulus at all: treated as not collapsed
    }
  };

  const auto w0 = width_at(0.0);
  if (w0 && *w0 <= w_tol) return 0.0;
  const auto w_hi = width_at(S_max);
  if (!w_hi || *w_hi > w_tol)
    throw NotReached("optimal width stays above tolerance up to S_max");

  double lo = 0.0, hi = S_max;
  const double precision = 1e-4 * S_max;
  while (hi - lo > precision) {
    const double mid = 0.5 * (lo + hi);
    const auto w = width_at(mid);
    if (w && *w <= w_tol) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace annulus
