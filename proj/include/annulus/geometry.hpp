#pragma once

#include <optional>
#include <string>
#include <vector>

namespace annulus {

// A data-type sector of the annulus diagram: inner/outer radii, an optional
// decomposition of the width into technical and legal components, and an
// optional snapshot timestamp carried through from segment files.
struct Segment {
  std::string label;
  double inner = 0.0;  // r_i
  double outer = 0.0;  // r_o
  std::optional<double> width_technical;
  std::optional<double> width_legal;
  std::optional<std::string> timestamp;

  double width() const { return outer - inner; }
};

// r_i / r_o, the share of structuring effort that is openly available.
// Undefined (std::domain_error) when r_o = 0; callers must report, not
// default, that case.
double openness_ratio(const Segment& segment);

enum class Configuration { thin_near, thin_far, thick_near, thick_far };

struct ClassifierThresholds {
  double tau_w = 0.0;  // width threshold: thin iff w < tau_w
  double tau_r = 0.0;  // radial threshold: far iff r_o >= tau_r
};

// Proportional defaults so classifications are scale-free.
ClassifierThresholds default_thresholds(double r_max);

Configuration classify_configuration(const Segment& segment,
                                     const ClassifierThresholds& thresholds);

enum class Trajectory { maturing, frontier_drift, commoditising, stagnant };

// Classifies the movement between two snapshots of the same segment.
// Inward movement of either arc beyond tol is a data error
// (std::domain_error); mismatched labels are std::invalid_argument.
Trajectory classify_trajectory(const Segment& earlier, const Segment& later,
                               double tol);

struct SegmentViolation {
  std::string invariant;
  std::string detail;
};

// Empty iff all segment invariants hold. Violations are returned as data,
// not thrown.
std::vector<SegmentViolation> validate_segment(const Segment& segment);

const char* configuration_name(Configuration c);
const char* trajectory_name(Trajectory t);

}  // namespace annulus
