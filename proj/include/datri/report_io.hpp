#ifndef DATRI_REPORT_IO_HPP
#define DATRI_REPORT_IO_HPP

// JSON, text and CSV renderings of battery reports, series fits and sweeps.

#include "datri/battery.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace datri {

using Json = nlohmann::ordered_json;

inline Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json json_numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

inline Json to_json(const Params& p) {
  Json j = Json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

inline Json to_json(const OdeSettings& s) {
  return Json{{"method", "dopri5 (embedded Runge-Kutta 5(4))"},
              {"rel_tol", s.rel_tol},
              {"abs_tol", s.abs_tol},
              {"initial_step", s.initial_step}};
}

inline Json to_json(const SphereSettings& s) {
  return Json{{"polar_nodes", s.polar_nodes}, {"azimuth_nodes", s.azimuth_nodes}};
}

inline Json to_json(const TubeSettings& s) { return Json{{"t_nodes", s.t_nodes}, {"phi_nodes", s.phi_nodes}}; }

inline Json to_json(const Tolerances& t) {
  return Json{{"universal_relative", t.universal_relative}, {"steiner_absolute", t.steiner_absolute},
              {"torus_scaled", t.torus_scaled},             {"datri_pass", t.datri_pass},
              {"datri_fail", t.datri_fail},                 {"cylinder_relative", t.cylinder_relative},
              {"cylinder_absolute", t.cylinder_absolute}};
}

inline Json to_json(const BatteryConfig& c) {
  return Json{{"seed", c.seed},
              {"sphere_radii", c.sphere_radii},
              {"steiner_samples", c.steiner_samples},
              {"capsule_radius", c.capsule_radius},
              {"capsule_length", c.capsule_length},
              {"curve_radius", c.curve_radius},
              {"torus_radius", c.torus_radius},
              {"evenness_samples", c.evenness_samples},
              {"probe_radius", c.probe_radius},
              {"hemisphere_axes", c.hemisphere_axes},
              {"tube_radius", c.tube_radius},
              {"tube_length", c.tube_length},
              {"arc_angle", c.arc_angle},
              {"l3_samples", c.l3_samples},
              {"series_directions", c.series_directions},
              {"geodesics", c.geodesics},
              {"cylinder_length", c.cylinder_length},
              {"knu_half_width", c.knu_half_width},
              {"knu_points", c.knu_points},
              {"sphere_quadrature", to_json(c.sphere)},
              {"tube_quadrature", to_json(c.tube)},
              {"ode", to_json(c.sphere.ode)},
              {"tolerances", to_json(c.tol)}};
}

inline Json to_json(const TestRecord& t) {
  return Json{{"name", t.name},
              {"category", to_string(t.category)},
              {"inputs", t.inputs},
              {"values", json_numbers(t.values)},
              {"defect", json_number(t.defect)},
              {"tolerance", t.tolerance},
              {"fail_threshold", t.fail_threshold},
              {"verdict", to_string(t.verdict)},
              {"note", t.note}};
}

inline Json to_json(const DiagnosticsReport& r) {
  Json pts = Json::array();
  for (const auto& p : r.base_points) pts.push_back({p.coords.x(), p.coords.y(), p.coords.z()});
  Json tests = Json::array();
  for (const auto& t : r.tests) tests.push_back(to_json(t));
  return Json{{"model", r.model},
              {"params", to_json(r.params)},
              {"working_radius", r.working_radius},
              {"base_points", pts},
              {"expected_datri", to_string(r.expected)},
              {"expected_provenance", r.expected_provenance},
              {"classification", to_string(r.classification)},
              {"matches_expected", r.matches_expected()},
              {"failing_test", r.failing_test},
              {"tests", tests},
              {"battery_config", to_json(r.config)}};
}

inline Json to_json(const SeriesFit& f) {
  Json c = Json::array();
  for (int k = f.k_min; k <= f.k_max(); ++k)
    c.push_back(Json{{"k", k}, {"value", json_number(f.coeff(k))}, {"uncertainty", json_number(f.uncertainty(k))}});
  return Json{{"k_min", f.k_min},
              {"k_max", f.k_max()},
              {"coefficients", c},
              {"residual", json_number(f.residual)},
              {"condition", json_number(f.condition)},
              {"radii", json_numbers(f.radii)}};
}

/// Plain-text summary of a report.
inline std::string report_text(const DiagnosticsReport& r) {
  std::ostringstream os;
  char line[256];
  os << "model:          " << r.model << "\n";
  os << "params:         " << to_json(r.params).dump() << "\n";
  os << "working radius: " << r.working_radius << "\n";
  os << "expected:       " << to_string(r.expected) << " (" << r.expected_provenance << ")\n";
  os << "classification: " << to_string(r.classification) << (r.matches_expected() ? " (matches expected)" : " (MISMATCH)")
     << "\n";
  if (!r.failing_test.empty()) os << "failing test:   " << r.failing_test << "\n";
  os << "\n";
  std::snprintf(line, sizeof line, "%-24s %-14s %-7s %-13s %-13s\n", "test", "category", "verdict", "defect", "tolerance");
  os << line;
  for (const auto& t : r.tests) {
    std::snprintf(line, sizeof line, "%-24s %-14s %-7s %-13.4e %-13.4e\n", t.name.c_str(), to_string(t.category),
                  to_string(t.verdict), t.defect, t.tolerance);
    os << line;
    if (t.verdict == TestVerdict::error) os << "    error: " << t.note << "\n";
  }
  return os.str();
}

/// 17 significant digits, '.' decimal separator.
inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

/// Writes '#'-prefixed preamble lines, a header row and numeric rows (CRLF-free).
inline void write_csv(std::ostream& os, const std::vector<std::string>& preamble,
                      const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  for (const auto& p : preamble) os << "# " << p << "\n";
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << csv_field(header[i]);
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_number(row[i]);
    os << "\n";
  }
}

}  // namespace datri

#endif  // DATRI_REPORT_IO_HPP
