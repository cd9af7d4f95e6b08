// Command-line surface: scenario validation, solving, comparative-statics
// sweeps, prediction checks, welfare curves, subsidy thresholds and SVG
// annulus diagrams. All tables are comma-separated with a header row and
// deterministic byte-for-byte across runs.
//
// Exit codes: 0 success, 1 usage or parse error, 2 infeasible model,
// 3 validation or convergence failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "annulus/diagram.hpp"
#include "annulus/scenario_io.hpp"
#include "annulus/statics.hpp"

namespace {

using namespace annulus;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitValidation = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) { return format_double(v, 12); }

std::string solution_header() {
  return "r_i_star,r_o_star,w_star,lambda,welfare,objective,binding,"
         "active_bounds,foc_inner_residual,foc_outer_residual,oracle_gap";
}

std::string solution_row(const Solution& s) {
  std::string row;
  row += fmt(s.point.inner);
  row += ',' + fmt(s.point.outer);
  row += ',' + fmt(s.width);
  row += ',' + fmt(s.shadow_price);
  row += ',' + fmt(s.welfare);
  row += ',' + fmt(s.objective);
  row += std::string(",") + (s.binding ? "true" : "false");
  row += ',' + to_string(s.active_bounds);
  row += ',' + fmt(s.inner_residual);
  row += ',' + fmt(s.outer_residual);
  row += ',' + fmt(s.oracle_gap);
  return row;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> values;
  size_t pos = 0;
  while (pos <= csv.size()) {
    const size_t comma = csv.find(',', pos);
    const std::string tok = comma == std::string::npos
                                ? csv.substr(pos)
                                : csv.substr(pos, comma - pos);
    pos = comma == std::string::npos ? csv.size() + 1 : comma + 1;
    if (tok.empty()) throw UsageError("--values: empty entry");
    if (tok == "none" || tok == "inf") {
      values.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      throw UsageError("--values: '" + tok + "' is not a number");
    values.push_back(v);
  }
  return values;
}

ObjectiveVariant parse_variant(const std::string& token) {
  const auto v = variant_from_token(token);
  if (!v)
    throw UsageError(
        "--variant-override must be foc_consistent or literal_eq1");
  return *v;
}

Scenario load_validated(const std::string& path) {
  Scenario s = load_scenario(path);
  validate(s);  // std::invalid_argument maps to exit 3 in main
  return s;
}

// ---------------------------------------------------------------------------

int run_validate(const std::string& path) {
  const Scenario s = load_scenario(path);
  const struct {
    const char* name;
    const FunctionalForm* form;
    FormRole role;
  } forms[] = {
      {"V", &s.value, FormRole::value},
      {"B", &s.premium, FormRole::openness_premium},
      {"C", &s.structuring_cost, FormRole::structuring_cost},
      {"M", &s.overlay_cost, FormRole::overlay_cost},
      {"R", &s.revenue, FormRole::revenue},
  };
  bool all_ok = true;
  std::cout << "form,verdict,detail\n";
  for (const auto& f : forms) {
    const ShapeReport report = check_shape(*f.form, f.role, s.r_max, 201);
    if (report.accepted) {
      std::cout << f.name << ",accepted,\n";
    } else {
      all_ok = false;
      std::cout << f.name << ",rejected," << report.violation->requirement
                << " violated near r = " << fmt(report.violation->r) << "\n";
    }
  }
  if (!all_ok) return kExitValidation;
  validate(s);  // scalar invariants; throws to the exit-3 handler
  return kExitOk;
}

int run_solve(const std::string& path, const std::optional<double>& oracle_res,
              const std::optional<std::string>& variant_override) {
  Scenario s = load_validated(path);
  if (variant_override) s.variant = parse_variant(*variant_override);
  if (oracle_res) {
    s.solver.oracle_resolution = *oracle_res;
    try {
      validate(s);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  const Solution sol = kkt_solve(s);
  std::cout << solution_header() << "\n" << solution_row(sol) << "\n";
  return kExitOk;
}

void print_sweep_table(const std::vector<SweepPoint>& table) {
  std::cout << "value,status," << solution_header() << "\n";
  for (const SweepPoint& p : table) {
    const std::string value =
        std::isinf(p.value) ? "none" : fmt(p.value);
    if (p.solution) {
      std::cout << value << ",ok," << solution_row(*p.solution) << "\n";
    } else {
      std::cout << value << ",infeasible,,,,,,,,,,,\n";
    }
  }
}

int run_sweep(const std::string& path, const std::string& param,
              const std::string& values_csv,
              const std::optional<std::string>& variant_override) {
  Scenario s = load_validated(path);
  if (variant_override) s.variant = parse_variant(*variant_override);
  SweepSpec spec{param, parse_values(values_csv)};
  try {
    print_sweep_table(sweep(s, spec));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return kExitOk;
}

int run_predict(const std::string& path, const std::string& prediction,
                const std::optional<std::string>& param,
                const std::string& values_csv,
                const std::optional<std::string>& variant_override) {
  Scenario s = load_validated(path);
  if (variant_override) s.variant = parse_variant(*variant_override);
  const auto id = prediction_from_name(prediction);
  if (!id) throw UsageError("--prediction must be one of P1..P5");

  std::string param_path;
  if (param) {
    param_path = *param;
  } else {
    // Default to the parameter the prediction concerns.
    switch (*id) {
      case PredictionId::P1:
      case PredictionId::P3: {
        const FormFamily fam = s.structuring_cost.family;
        param_path = std::string("C.") + param_name(fam, scale_param_index(fam));
        break;
      }
      case PredictionId::P2: {
        const FormFamily fam = s.premium.family;
        param_path = std::string("B.") + param_name(fam, scale_param_index(fam));
        break;
      }
      case PredictionId::P4: param_path = "S"; break;
      case PredictionId::P5: param_path = "width_cap"; break;
    }
  }

  SweepSpec spec{param_path, parse_values(values_csv)};
  PredictionReport report;
  try {
    report = check_prediction(s, *id, spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::cout << prediction_name(report.id) << " " << verdict_name(report.verdict)
            << "\n";
  if (!report.notes.empty()) std::cout << "# " << report.notes << "\n";
  print_sweep_table(report.table);
  return kExitOk;  // any verdict is a finding, not a command failure
}

int run_curve(const std::string& path, int n_points,
              const std::optional<std::string>& variant_override) {
  Scenario s = load_validated(path);
  if (variant_override) s.variant = parse_variant(*variant_override);
  WelfareCurve curve;
  try {
    curve = welfare_curve(s, n_points);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (curve.peak) {
    std::cout << "# peak_w = " << fmt(curve.peak->w)
              << ", peak_objective = " << fmt(curve.peak->objective) << "\n";
  } else {
    std::cout << "# no feasible point on the curve\n";
  }
  std::cout << "w,welfare,objective,feasible\n";
  for (const CurvePoint& p : curve.points) {
    std::cout << fmt(p.w) << ',' << fmt(p.welfare) << ',' << fmt(p.objective)
              << ',' << (p.feasible ? "true" : "false") << "\n";
  }
  return kExitOk;
}

int run_threshold(const std::string& path, double w_tol, double s_max,
                  const std::optional<std::string>& variant_override) {
  Scenario s = load_validated(path);
  if (variant_override) s.variant = parse_variant(*variant_override);
  std::cout << "S_star\n";
  try {
    const double s_star = subsidy_threshold(s, w_tol, s_max);
    std::cout << fmt(s_star) << "\n";
  } catch (const NotReached&) {
    std::cout << "NotReached\n";
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return kExitOk;
}

int run_diagram(const std::string& path, const std::optional<std::string>& out,
                const std::optional<std::string>& thresholds_csv) {
  const std::vector<Segment> segments = load_segments(path);
  DiagramOptions options;
  if (thresholds_csv) {
    const std::vector<double> ts = parse_values(*thresholds_csv);
    if (ts.size() != 2 || !(ts[0] > 0.0) || !(ts[1] > 0.0))
      throw UsageError("--thresholds expects 'tau_w,tau_r' with both positive");
    options.thresholds = ClassifierThresholds{ts[0], ts[1]};
  }
  const std::string svg = render_segment_diagram(segments, options);
  if (out) {
    std::ofstream f(*out, std::ios::binary);
    if (!f) throw UsageError("cannot open output file: " + *out);
    f << svg;
  } else {
    std::cout << svg;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-boundary welfare model of open data provision: solver, "
               "comparative statics and annulus diagnostics"};
  app.require_subcommand(1);

  std::string scenario_path, segments_path;
  std::string param, values_csv, prediction;
  std::optional<std::string> param_opt, variant_override, out_path, thresholds;
  std::optional<double> oracle_res;
  int n_points = 100;
  double w_tol = 0.0, s_max = 0.0;

  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "Parse a scenario file and check the five form shapes");
  validate_cmd->add_option("scenario", scenario_path)->required();

  CLI::App* solve_cmd =
      app.add_subcommand("solve", "Solve for the optimal boundaries");
  solve_cmd->add_option("scenario", scenario_path)->required();
  solve_cmd->add_option("--oracle-resolution", oracle_res,
                        "Grid resolution for the oracle gap");
  solve_cmd->add_option("--variant-override", variant_override,
                        "Override the objective variant");

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Re-solve across one scalar parameter");
  sweep_cmd->add_option("scenario", scenario_path)->required();
  sweep_cmd->add_option("--param", param, "Parameter path, e.g. S or C.c")
      ->required();
  sweep_cmd->add_option("--values", values_csv, "Comma-separated values")
      ->required();
  sweep_cmd->add_option("--variant-override", variant_override);

  CLI::App* predict_cmd =
      app.add_subcommand("predict", "Check one qualitative prediction P1..P5");
  predict_cmd->add_option("scenario", scenario_path)->required();
  predict_cmd->add_option("--prediction", prediction)->required();
  predict_cmd->add_option("--param", param_opt,
                          "Parameter path; defaults to the prediction's one");
  predict_cmd->add_option("--values", values_csv)->required();
  predict_cmd->add_option("--variant-override", variant_override);

  CLI::App* curve_cmd = app.add_subcommand(
      "curve", "Welfare as a function of width at the optimal outer boundary");
  curve_cmd->add_option("scenario", scenario_path)->required();
  curve_cmd->add_option("--points", n_points, "Number of sample points")
      ->check(CLI::Range(10, 10000000));
  curve_cmd->add_option("--variant-override", variant_override);

  CLI::App* threshold_cmd = app.add_subcommand(
      "threshold", "Smallest subsidy that collapses the optimal width");
  threshold_cmd->add_option("scenario", scenario_path)->required();
  threshold_cmd->add_option("--w-tol", w_tol)->required();
  threshold_cmd->add_option("--s-max", s_max)->required();
  threshold_cmd->add_option("--variant-override", variant_override);

  CLI::App* diagram_cmd =
      app.add_subcommand("diagram", "Render a segment file as an SVG diagram");
  diagram_cmd->add_option("segments", segments_path)->required();
  diagram_cmd->add_option("--out", out_path, "Output SVG path (default stdout)");
  diagram_cmd->add_option("--thresholds", thresholds,
                          "tau_w,tau_r for configuration annotations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate_cmd->parsed()) return run_validate(scenario_path);
    if (solve_cmd->parsed())
      return run_solve(scenario_path, oracle_res, variant_override);
    if (sweep_cmd->parsed())
      return run_sweep(scenario_path, param, values_csv, variant_override);
    if (predict_cmd->parsed())
      return run_predict(scenario_path, prediction, param_opt, values_csv,
                         variant_override);
    if (curve_cmd->parsed())
      return run_curve(scenario_path, n_points, variant_override);
    if (threshold_cmd->parsed())
      return run_threshold(scenario_path, w_tol, s_max, variant_override);
    if (diagram_cmd->parsed())
      return run_diagram(segments_path, out_path, thresholds);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InfeasibleScenario& e) {
    std::cerr << "error: no feasible boundaries: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const NoConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
