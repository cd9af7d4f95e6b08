#include "annulus/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace annulus {

namespace {

constexpr double kDecompositionTol = 1e-9;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

double openness_ratio(const Segment& segment) {
  if (!(segment.outer > 0.0))
    throw std::domain_error("openness ratio undefined for r_o = 0");
  return segment.inner / segment.outer;
}

ClassifierThresholds default_thresholds(double r_max) {
  return {0.25 * r_max, 0.5 * r_max};
}

Configuration classify_configuration(const Segment& segment,
                                     const ClassifierThresholds& thresholds) {
  if (!(thresholds.tau_w > 0.0) || !(thresholds.tau_r > 0.0))
    throw std::invalid_argument("classifier thresholds must be positive");
  const bool thin = segment.width() < thresholds.tau_w;
  const bool far = segment.outer >= thresholds.tau_r;
  if (thin) return far ? Configuration::thin_far : Configuration::thin_near;
  return far ? Configuration::thick_far : Configuration::thick_near;
}

Trajectory classify_trajectory(const Segment& earlier, const Segment& later,
                               double tol) {
  if (earlier.label != later.label)
    throw std::invalid_argument("trajectory: segment labels differ (" +
                                earlier.label + " vs " + later.label + ")");
  if (!(tol >= 0.0))
    throw std::invalid_argument("trajectory: tol must be >= 0");
  const double di = later.inner - earlier.inner;
  const double doo = later.outer - earlier.outer;
  if (di < -tol || doo < -tol)
    throw std::domain_error(
        "trajectory: arcs moved inward (delta r_i = " + num(di) +
        ", delta r_o = " + num(doo) + "); the model has no inward dynamics");
  const bool inner_moves = di > tol;
  const bool outer_moves = doo > tol;
  if (inner_moves && outer_moves) return Trajectory::maturing;
  if (outer_moves) return Trajectory::frontier_drift;
  if (inner_moves) return Trajectory::commoditising;
  return Trajectory::stagnant;
}

std::vector<SegmentViolation> validate_segment(const Segment& segment) {
  std::vector<SegmentViolation> out;
  if (!std::isfinite(segment.inner) || !std::isfinite(segment.outer)) {
    out.push_back({"finite radii", "r_i = " + num(segment.inner) +
                                       ", r_o = " + num(segment.outer)});
    return out;
  }
  if (segment.inner < 0.0)
    out.push_back({"r_i >= 0", "r_i = " + num(segment.inner)});
  if (segment.inner > segment.outer)
    out.push_back({"r_i <= r_o", "r_i = " + num(segment.inner) +
                                     " exceeds r_o = " + num(segment.outer)});
  if (segment.width_technical && *segment.width_technical < 0.0)
    out.push_back({"width_technical >= 0",
                   "width_technical = " + num(*segment.width_technical)});
  if (segment.width_legal && *segment.width_legal < 0.0)
    out.push_back(
        {"width_legal >= 0", "width_legal = " + num(*segment.width_legal)});
  if (segment.width_technical && segment.width_legal) {
    const double sum = *segment.width_technical + *segment.width_legal;
    if (std::abs(sum - segment.width()) > kDecompositionTol)
      out.push_back({"width_technical + width_legal = r_o - r_i",
                     num(sum) + " != " + num(segment.width())});
  }
  return out;
}

const char* configuration_name(Configuration c) {
  switch (c) {
    case Configuration::thin_near: return "thin_near";
    case Configuration::thin_far: return "thin_far";
    case Configuration::thick_near: return "thick_near";
    case Configuration::thick_far: return "thick_far";
  }
  return "?";
}

const char* trajectory_name(Trajectory t) {
  switch (t) {
    case Trajectory::maturing: return "maturing";
    case Trajectory::frontier_drift: return "frontier_drift";
    case Trajectory::commoditising: return "commoditising";
    case Trajectory::stagnant: return "stagnant";
  }
  return "?";
}

}  // namespace annulus
