#include "annulus/scenario_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace annulus {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ParseError("line " + std::to_string(line) + ": " + msg);
}

double parse_number(std::string_view text, int line, const std::string& key) {
  const std::string buf(text);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end == buf.c_str() || *end != '\0' || errno == ERANGE)
    fail(line, "value of '" + key + "' is not a number: '" + buf + "'");
  return v;
}

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry, std::less<>>;

struct RawFile {
  std::map<std::string, Section, std::less<>> sections;
  std::map<std::string, int, std::less<>> section_lines;
};

RawFile split_sections(std::string_view text) {
  RawFile raw;
  std::string current;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t eol = text.find('\n', pos);
    std::string_view line = eol == std::string_view::npos
                                ? text.substr(pos)
                                : text.substr(pos, eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (name.empty()) fail(line_no, "empty section name");
      if (raw.sections.count(name)) fail(line_no, "duplicate section [" + name + "]");
      raw.sections[name];
      raw.section_lines[name] = line_no;
      current = name;
      continue;
    }
    if (current.empty()) fail(line_no, "key outside of any [section]");
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) fail(line_no, "empty key");
    if (value.empty()) fail(line_no, "empty value for '" + key + "'");
    Section& section = raw.sections[current];
    if (section.count(key))
      fail(line_no, "duplicate key '" + key + "' in [" + current + "]");
    section[key] = Entry{value, line_no};
  }
  return raw;
}

const Entry& require_key(const Section& section, const std::string& section_name,
                         const std::string& key, int section_line) {
  const auto it = section.find(key);
  if (it == section.end())
    fail(section_line, "section [" + section_name + "] is missing key '" + key + "'");
  return it->second;
}

void reject_unknown(const Section& section, const std::string& section_name,
                    std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, entry] : section) {
    bool ok = false;
    for (std::string_view a : allowed)
      if (key == a) ok = true;
    if (!ok)
      fail(entry.line, "unknown key '" + key + "' in [" + section_name + "]");
  }
}

FunctionalForm parse_form(const RawFile& raw, const std::string& name) {
  const auto it = raw.sections.find(name);
  if (it == raw.sections.end())
    throw ParseError("missing section [" + name + "]");
  const Section& section = it->second;
  const int sline = raw.section_lines.at(name);
  const Entry& fam = require_key(section, name, "family", sline);
  const auto family = family_from_name(fam.value);
  if (!family)
    fail(fam.line, "unknown family '" + fam.value + "' in [" + name + "]");
  const std::string k0 = param_name(*family, 0);
  const std::string k1 = param_name(*family, 1);
  reject_unknown(section, name, {"family", k0, k1});
  const Entry& e0 = require_key(section, name, k0, sline);
  const Entry& e1 = require_key(section, name, k1, sline);
  FunctionalForm form{*family, parse_number(e0.value, e0.line, k0),
                      parse_number(e1.value, e1.line, k1)};
  try {
    validate(form);
  } catch (const std::invalid_argument& e) {
    fail(sline, std::string(e.what()) + " in [" + name + "]");
  }
  return form;
}

}  // namespace

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

Scenario parse_scenario(std::string_view text) {
  const RawFile raw = split_sections(text);

  for (const auto& [name, section] : raw.sections) {
    if (name != "model" && name != "solver" && name != "V" && name != "B" &&
        name != "C" && name != "M" && name != "R")
      fail(raw.section_lines.at(name), "unknown section [" + name + "]");
  }

  const auto model_it = raw.sections.find("model");
  if (model_it == raw.sections.end()) throw ParseError("missing section [model]");
  const Section& model = model_it->second;
  const int model_line = raw.section_lines.at("model");
  reject_unknown(model, "model", {"objective_variant", "S", "r_max", "width_cap"});

  Scenario s;
  const Entry& variant = require_key(model, "model", "objective_variant", model_line);
  const auto v = variant_from_token(variant.value);
  if (!v)
    fail(variant.line, "objective_variant must be foc_consistent or literal_eq1");
  s.variant = *v;
  const Entry& subsidy = require_key(model, "model", "S", model_line);
  s.subsidy = parse_number(subsidy.value, subsidy.line, "S");
  const Entry& rmax = require_key(model, "model", "r_max", model_line);
  s.r_max = parse_number(rmax.value, rmax.line, "r_max");
  if (const auto it = model.find("width_cap"); it != model.end())
    s.width_cap = parse_number(it->second.value, it->second.line, "width_cap");

  s.value = parse_form(raw, "V");
  s.premium = parse_form(raw, "B");
  s.structuring_cost = parse_form(raw, "C");
  s.overlay_cost = parse_form(raw, "M");
  s.revenue = parse_form(raw, "R");

  if (const auto it = raw.sections.find("solver"); it != raw.sections.end()) {
    const Section& solver = it->second;
    reject_unknown(solver, "solver",
                   {"grid_resolution", "newton_tol", "feasibility_tol"});
    if (const auto k = solver.find("grid_resolution"); k != solver.end())
      s.solver.oracle_resolution =
          parse_number(k->second.value, k->second.line, "grid_resolution");
    if (const auto k = solver.find("newton_tol"); k != solver.end())
      s.solver.newton_tol =
          parse_number(k->second.value, k->second.line, "newton_tol");
    if (const auto k = solver.find("feasibility_tol"); k != solver.end())
      s.solver.feasibility_tol =
          parse_number(k->second.value, k->second.line, "feasibility_tol");
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  auto num = [](double v) { return format_double(v, 17); };
  out << "[model]\n";
  out << "objective_variant = " << variant_token(s.variant) << "\n";
  out << "S = " << num(s.subsidy) << "\n";
  out << "r_max = " << num(s.r_max) << "\n";
  if (s.width_cap) out << "width_cap = " << num(*s.width_cap) << "\n";

  const struct {
    const char* name;
    const FunctionalForm* form;
  } forms[] = {{"V", &s.value},
               {"B", &s.premium},
               {"C", &s.structuring_cost},
               {"M", &s.overlay_cost},
               {"R", &s.revenue}};
  for (const auto& f : forms) {
    out << "\n[" << f.name << "]\n";
    out << "family = " << family_name(f.form->family) << "\n";
    out << param_name(f.form->family, 0) << " = " << num(f.form->p0) << "\n";
    out << param_name(f.form->family, 1) << " = " << num(f.form->p1) << "\n";
  }

  const SolverSettings defaults;
  if (s.solver != defaults) {
    out << "\n[solver]\n";
    if (s.solver.oracle_resolution)
      out << "grid_resolution = " << num(*s.solver.oracle_resolution) << "\n";
    if (s.solver.newton_tol != defaults.newton_tol)
      out << "newton_tol = " << num(s.solver.newton_tol) << "\n";
    if (s.solver.feasibility_tol != defaults.feasibility_tol)
      out << "feasibility_tol = " << num(s.solver.feasibility_tol) << "\n";
  }
  return out.str();
}

namespace {

constexpr std::string_view kSegmentHeader =
    "label,r_i,r_o,width_technical,width_legal,timestamp";

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  size_t pos = 0;
  while (true) {
    const size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.emplace_back(trim(line.substr(pos)));
      break;
    }
    fields.emplace_back(trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return fields;
}

}  // namespace

std::vector<Segment> parse_segments(std::string_view text) {
  std::vector<Segment> out;
  int line_no = 0;
  bool header_seen = false;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t eol = text.find('\n', pos);
    std::string_view line = eol == std::string_view::npos
                                ? text.substr(pos)
                                : text.substr(pos, eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kSegmentHeader)
        fail(line_no, "segment file must start with header '" +
                          std::string(kSegmentHeader) + "'");
      header_seen = true;
      continue;
    }
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() < 3 || fields.size() > 6)
      fail(line_no, "expected 3 to 6 comma-separated fields");
    if (fields[0].empty()) fail(line_no, "segment label must not be empty");
    Segment seg;
    seg.label = fields[0];
    seg.inner = parse_number(fields[1], line_no, "r_i");
    seg.outer = parse_number(fields[2], line_no, "r_o");
    if (fields.size() > 3 && !fields[3].empty())
      seg.width_technical = parse_number(fields[3], line_no, "width_technical");
    if (fields.size() > 4 && !fields[4].empty())
      seg.width_legal = parse_number(fields[4], line_no, "width_legal");
    if (fields.size() > 5 && !fields[5].empty()) seg.timestamp = fields[5];
    out.push_back(std::move(seg));
  }
  if (!header_seen) throw ParseError("segment file is empty");
  return out;
}

std::vector<Segment> load_segments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open segment file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_segments(buf.str());
}

}  // namespace annulus
