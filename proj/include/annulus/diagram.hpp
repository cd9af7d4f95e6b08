#pragma once

#include <optional>
#include <string>
#include <vector>

#include "annulus/geometry.hpp"

namespace annulus {

struct DiagramOptions {
  // When set, each sector is annotated with its configuration class.
  std::optional<ClassifierThresholds> thresholds;
};

// Renders the segments as an SVG annulus diagram: one angular sector per
// segment in file order with equal angular spans, the band between the two
// arcs shaded, and each sector labeled with its name and openness ratio to
// two decimals. Throws std::invalid_argument listing the violations when
// any segment is invalid.
std::string render_segment_diagram(const std::vector<Segment>& segments,
                                   const DiagramOptions& options = {});

}  // namespace annulus
