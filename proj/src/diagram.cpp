#include "annulus/diagram.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace annulus {

namespace {

constexpr double kCanvas = 640.0;
constexpr double kCenter = kCanvas / 2.0;
constexpr double kPlotRadius = 250.0;
constexpr double kGapDegrees = 2.0;

std::string xy(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape_xml(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Point {
  double x, y;
};

Point polar(double radius, double angle_deg) {
  const double rad = angle_deg * std::numbers::pi / 180.0;
  return {kCenter + radius * std::cos(rad), kCenter + radius * std::sin(rad)};
}

std::string arc_path(double radius, double a0, double a1, bool forward) {
  // One circular arc from a0 to a1 (degrees); forward means increasing angle.
  const Point from = polar(radius, forward ? a0 : a1);
  const Point to = polar(radius, forward ? a1 : a0);
  const int large = (a1 - a0) > 180.0 ? 1 : 0;
  const int sweep = forward ? 1 : 0;
  std::ostringstream p;
  p << "M " << xy(from.x) << " " << xy(from.y) << " A " << xy(radius) << " "
    << xy(radius) << " 0 " << large << " " << sweep << " " << xy(to.x) << " "
    << xy(to.y);
  return p.str();
}

std::string band_path(double r_inner, double r_outer, double a0, double a1) {
  const int large = (a1 - a0) > 180.0 ? 1 : 0;
  const Point o0 = polar(r_outer, a0);
  const Point o1 = polar(r_outer, a1);
  std::ostringstream p;
  p << "M " << xy(o0.x) << " " << xy(o0.y) << " A " << xy(r_outer) << " "
    << xy(r_outer) << " 0 " << large << " 1 " << xy(o1.x) << " " << xy(o1.y);
  if (r_inner > 0.0) {
    const Point i1 = polar(r_inner, a1);
    const Point i0 = polar(r_inner, a0);
    p << " L " << xy(i1.x) << " " << xy(i1.y) << " A " << xy(r_inner) << " "
      << xy(r_inner) << " 0 " << large << " 0 " << xy(i0.x) << " " << xy(i0.y);
  } else {
    p << " L " << xy(kCenter) << " " << xy(kCenter);
  }
  p << " Z";
  return p.str();
}

}  // namespace

std::string render_segment_diagram(const std::vector<Segment>& segments,
                                   const DiagramOptions& options) {
  if (segments.empty())
    throw std::invalid_argument("diagram: no segments to draw");

  std::string problems;
  for (const Segment& seg : segments) {
    for (const SegmentViolation& v : validate_segment(seg)) {
      problems += "segment '" + seg.label + "': " + v.invariant + " (" +
                  v.detail + "); ";
    }
  }
  if (!problems.empty())
    throw std::invalid_argument("diagram: invalid segments: " + problems);

  double max_outer = 0.0;
  for (const Segment& seg : segments) max_outer = std::max(max_outer, seg.outer);
  const double scale = max_outer > 0.0 ? kPlotRadius / max_outer : 1.0;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<!-- annulus diagram generator v1 -->\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCanvas
      << "\" height=\"" << kCanvas << "\" viewBox=\"0 0 " << kCanvas << " "
      << kCanvas << "\">\n";
  svg << "  <rect width=\"" << kCanvas << "\" height=\"" << kCanvas
      << "\" fill=\"white\"/>\n";
  svg << "  <circle cx=\"" << xy(kCenter) << "\" cy=\"" << xy(kCenter)
      << "\" r=\"2.5\" fill=\"#555555\"/>\n";

  const double span = 360.0 / static_cast<double>(segments.size());
  for (size_t k = 0; k < segments.size(); ++k) {
    const Segment& seg = segments[k];
    const double a0 = -90.0 + span * static_cast<double>(k) + kGapDegrees / 2.0;
    const double a1 = -90.0 + span * static_cast<double>(k + 1) - kGapDegrees / 2.0;
    const double r_in = seg.inner * scale;
    const double r_out = seg.outer * scale;

    svg << "  <g>\n";
    if (r_out > 0.0) {
      svg << "    <path d=\"" << band_path(r_in, r_out, a0, a1)
          << "\" fill=\"#4e79a7\" fill-opacity=\"0.35\" stroke=\"none\"/>\n";
      svg << "    <path d=\"" << arc_path(r_out, a0, a1, true)
          << "\" fill=\"none\" stroke=\"#2f4b6e\" stroke-width=\"2\"/>\n";
      if (r_in > 0.0) {
        svg << "    <path d=\"" << arc_path(r_in, a0, a1, true)
            << "\" fill=\"none\" stroke=\"#59a14f\" stroke-width=\"2\"/>\n";
      }
    }

    std::string ratio = "n/a";
    if (seg.outer > 0.0) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.2f", openness_ratio(seg));
      ratio = buf;
    }
    const double mid = 0.5 * (a0 + a1);
    const Point anchor = polar(std::min(r_out + 22.0, kPlotRadius + 34.0), mid);
    svg << "    <text x=\"" << xy(anchor.x) << "\" y=\"" << xy(anchor.y)
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
        << escape_xml(seg.label) << " (" << ratio << ")</text>\n";
    if (options.thresholds) {
      const Configuration c = classify_configuration(seg, *options.thresholds);
      svg << "    <text x=\"" << xy(anchor.x) << "\" y=\"" << xy(anchor.y + 15.0)
          << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#666666\" "
             "text-anchor=\"middle\">"
          << configuration_name(c) << "</text>\n";
    }
    svg << "  </g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace annulus
