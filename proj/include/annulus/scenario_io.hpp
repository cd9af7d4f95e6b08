#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "annulus/geometry.hpp"
#include "annulus/model.hpp"

namespace annulus {

// Scenario or segment file could not be parsed against the schema.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic "%.*g" rendering (C locale semantics, no trailing noise).
std::string format_double(double v, int precision);

// Scenario files are line-oriented `key = value` pairs under `[section]`
// headers, UTF-8, with `#` comments. Sections: [model] (objective_variant,
// S, r_max, optional width_cap), [V] [B] [C] [M] [R] (family plus the
// family's named parameters) and an optional [solver] (grid_resolution,
// newton_tol, feasibility_tol). The schema is strict: unknown sections or
// keys, duplicates and missing entries are errors.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

// Serialization round-trips: parse(serialize(s)) == s, byte-stable across
// repeated runs.
std::string serialize_scenario(const Scenario& scenario);

// Segment files are CSV with the exact header
// `label,r_i,r_o,width_technical,width_legal,timestamp`; the trailing three
// fields may be empty. Parsing checks structure only; segment invariants
// are checked separately via validate_segment.
std::vector<Segment> parse_segments(std::string_view text);
std::vector<Segment> load_segments(const std::filesystem::path& path);

}  // namespace annulus
