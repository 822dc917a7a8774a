// datri-lab: command-line front end for the diagnostics battery, sweeps and series fits.

#include "datri/report_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace datri;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitMismatch = 3;

const char* kSweepColumns =
    "Sweep kinds and CSV columns (one row per grid value):\n"
    "  sphere-total      r, total, relative_to_8pi          (geodesic sphere S_p(r))\n"
    "  hemisphere-total  r, plus, minus, difference          (hemispheres with axes +r u and -r u)\n"
    "  tube-total        r, total, per_length_2pi, absolute_total, area\n"
    "                                                        (cylinder about the geodesic of length --length from (p, u))\n"
    "  theta-profile     r, theta_plus, theta_minus, tau_sphere_plus, tau_sphere_minus\n"
    "  knu-profile       t, knu                              (K(nu(t)) = tau/2 - rho(g', g') along the geodesic)\n"
    "Default grids: 5 radii evenly spaced in [1/9, 5/9] x working radius; tube-total uses\n"
    "{0.08, 0.12, 0.16, 0.20, 0.24} x working radius; knu-profile uses 9 points in [-0.4, 0.4] x working radius.\n"
    "Every CSV starts with two '#' lines: the generation timestamp and the resolved config (JSON).\n";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string model;
  Params params;
  std::vector<double> r;
  std::string out = ".";
  unsigned seed = 0;
  std::string kind;
  int point = 0;
  std::optional<Vec3> at;
  Vec3 axis = Vec3::UnitX();
  std::optional<double> length;
  int kmax_theta = kThetaSeriesOrder;
  int kmax_taus = kTauSThetaSeriesOrder;
  OdeSettings ode{};
  SphereSettings sphere{};
  TubeSettings tube{};
  bool timestamp = true;
};

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const Json& j, const char* key) {
  if (!j.is_array() || j.size() != 3) throw UsageError(std::string(key) + ": expected an array of 3 numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Vec3 vec_from(const std::vector<double>& v, const char* key) {
  if (v.size() != 3) throw UsageError(std::string(key) + ": expected 3 comma-separated numbers");
  return Vec3(v[0], v[1], v[2]);
}

void check_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + ": expected a JSON object");
  for (const auto& [k, v] : j.items())
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw UsageError("config: unknown key '" + k + "' in " + where);
}

/// Applies a JSON config file; unknown keys are errors.
void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
  check_keys(j, {"command", "model", "params", "r", "out", "seed", "kind", "point", "at", "axis", "length",
                 "kmax_theta", "kmax_taus", "ode", "quadrature"},
             "top level");
  try {
    if (j.contains("command") && j["command"].get<std::string>() != c.command)
      throw UsageError("config: command '" + j["command"].get<std::string>() + "' does not match '" + c.command + "'");
    if (j.contains("model")) c.model = j["model"].get<std::string>();
    if (j.contains("params") && !j["params"].is_object()) throw UsageError("config: params must be an object");
    if (j.contains("params"))
      for (const auto& [k, v] : j["params"].items()) c.params[k] = v.get<double>();
    if (j.contains("r")) c.r = j["r"].get<std::vector<double>>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<unsigned>();
    if (j.contains("kind")) c.kind = j["kind"].get<std::string>();
    if (j.contains("point")) c.point = j["point"].get<int>();
    if (j.contains("at") && !j["at"].is_null()) c.at = vec_from(j["at"], "at");
    if (j.contains("axis")) c.axis = vec_from(j["axis"], "axis");
    if (j.contains("length") && !j["length"].is_null()) c.length = j["length"].get<double>();
    if (j.contains("kmax_theta")) c.kmax_theta = j["kmax_theta"].get<int>();
    if (j.contains("kmax_taus")) c.kmax_taus = j["kmax_taus"].get<int>();
    if (j.contains("ode")) {
      const Json& o = j["ode"];
      check_keys(o, {"rel_tol", "abs_tol", "initial_step"}, "ode");
      if (o.contains("rel_tol")) c.ode.rel_tol = o["rel_tol"].get<double>();
      if (o.contains("abs_tol")) c.ode.abs_tol = o["abs_tol"].get<double>();
      if (o.contains("initial_step")) c.ode.initial_step = o["initial_step"].get<double>();
    }
    if (j.contains("quadrature")) {
      const Json& q = j["quadrature"];
      check_keys(q, {"sphere_polar", "sphere_azimuth", "tube_t", "tube_phi"}, "quadrature");
      if (q.contains("sphere_polar")) c.sphere.polar_nodes = q["sphere_polar"].get<int>();
      if (q.contains("sphere_azimuth")) c.sphere.azimuth_nodes = q["sphere_azimuth"].get<int>();
      if (q.contains("tube_t")) c.tube.t_nodes = q["tube_t"].get<int>();
      if (q.contains("tube_phi")) c.tube.phi_nodes = q["tube_phi"].get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
}

Json resolved_json(const RunConfig& c) {
  Json j{{"command", c.command}, {"model", c.model}, {"params", to_json(c.params)}, {"r", c.r}, {"out", c.out},
         {"seed", c.seed}};
  if (c.command == "sweep") j["kind"] = c.kind;
  j["point"] = c.point;
  j["at"] = c.at ? vec_json(*c.at) : Json(nullptr);
  j["axis"] = vec_json(c.axis);
  if (c.command == "sweep") j["length"] = c.length ? Json(*c.length) : Json(nullptr);
  if (c.command == "series") {
    j["kmax_theta"] = c.kmax_theta;
    j["kmax_taus"] = c.kmax_taus;
  }
  j["ode"] = Json{{"rel_tol", c.ode.rel_tol}, {"abs_tol", c.ode.abs_tol}, {"initial_step", c.ode.initial_step}};
  j["quadrature"] = Json{{"sphere_polar", c.sphere.polar_nodes},
                         {"sphere_azimuth", c.sphere.azimuth_nodes},
                         {"tube_t", c.tube.t_nodes},
                         {"tube_phi", c.tube.phi_nodes}};
  return j;
}

std::string timestamp_line(const RunConfig& c) {
  if (!c.timestamp) return "generated: (timestamp omitted)";
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return std::string("generated: ") + buf;
}

/// {"timestamp": ..., "config": ..., <key>: payload}; the timestamp occupies one line.
void write_json(const fs::path& path, const RunConfig& c, const std::string& key, const Json& payload) {
  Json doc{{"timestamp", timestamp_line(c).substr(11)}, {"config", resolved_json(c)}, {key, payload}};
  std::ofstream out(path);
  out << doc.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

struct Probe {
  ChartPoint p;
  Vec3 u;
};

Probe probe(const RunConfig& c, const ModelInstance& inst) {
  ChartPoint p;
  if (c.at) {
    p = ChartPoint(*c.at);
  } else {
    if (c.point < 0 || c.point >= static_cast<int>(inst.base_points.size()))
      throw UsageError("--point must be in [0, " + std::to_string(inst.base_points.size() - 1) + "]");
    p = inst.base_points[static_cast<std::size_t>(c.point)];
  }
  const double n = c.axis.norm();
  if (!(n > 0)) throw UsageError("--axis must be nonzero");
  const Mat3 f = orthonormal_frame(inst.model->metric(p.coords), Vec3::UnitX());
  return {p, f * (c.axis / n)};
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

// ---------------------------------------------------------------------------

int cmd_report(RunConfig& c, const ModelInstance& inst) {
  BatteryConfig bc;
  bc.seed = c.seed;
  bc.sphere = c.sphere;
  bc.sphere.ode = c.ode;
  bc.tube = c.tube;
  bc.tube.ode = c.ode;
  const DiagnosticsReport rep = run_battery(inst, bc);
  fs::create_directories(c.out);
  write_json(fs::path(c.out) / "report.json", c, "report", to_json(rep));
  const std::string text = report_text(rep);
  {
    std::ofstream out(fs::path(c.out) / "report.txt");
    out << timestamp_line(c) << "\n" << "config: " << resolved_json(c).dump() << "\n\n" << text;
  }
  std::cout << text;
  if (rep.classification == Classification::invalid) return kExitInvalid;
  return rep.matches_expected() ? kExitOk : kExitMismatch;
}

int cmd_sweep(RunConfig& c, const ModelInstance& inst) {
  const MetricModel& m = *inst.model;
  const double wr = inst.working_radius;
  const Probe pr = probe(c, inst);
  const std::string& kind = c.kind;
  if (c.r.empty()) {
    if (kind == "tube-total")
      c.r = cylinder_radius_grid(wr);
    else if (kind == "knu-profile")
      c.r = linspace(-0.4 * wr, 0.4 * wr, 9);
    else
      c.r = linspace(wr / 9.0, 5.0 * wr / 9.0, 5);
  }
  for (double r : c.r) {
    const bool ok = kind == "knu-profile" ? std::abs(r) <= wr : (r > 0 && r <= wr);
    if (!ok)
      throw UsageError("grid value " + csv_number(r) + " is outside the working radius " + csv_number(wr) +
                       " of model " + m.name());
  }
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  if (kind == "sphere-total") {
    header = {"r", "total", "relative_to_8pi"};
    for (double r : c.r) {
      const double t = total_scalar_sphere(m, pr.p, r, c.sphere);
      rows.push_back({r, t, t / (8 * kPi) - 1.0});
    }
  } else if (kind == "hemisphere-total") {
    header = {"r", "plus", "minus", "difference"};
    for (double r : c.r) {
      const double hp = total_scalar_hemisphere(m, TangentVector{pr.p, r * pr.u}, c.sphere);
      const double hm = total_scalar_hemisphere(m, TangentVector{pr.p, -r * pr.u}, c.sphere);
      rows.push_back({r, hp, hm, hp - hm});
    }
  } else if (kind == "tube-total") {
    if (!c.length) c.length = wr;
    const GeodesicCurve axis(pr.p, pr.u, *c.length);
    header = {"r", "total", "per_length_2pi", "absolute_total", "area"};
    for (double r : c.r) {
      const TubeTotal t = total_scalar_tube_detailed(m, axis, r, c.tube);
      rows.push_back({r, t.total, t.total / (2 * kPi * *c.length), t.absolute_total, t.area});
    }
  } else if (kind == "theta-profile") {
    header = {"r", "theta_plus", "theta_minus", "tau_sphere_plus", "tau_sphere_minus"};
    for (double r : c.r) {
      const SphereNode a = sphere_node(m, pr.p, pr.u, r, c.ode);
      const SphereNode b = sphere_node(m, pr.p, Vec3(-pr.u), r, c.ode);
      rows.push_back({r, a.theta, b.theta, a.tau_sphere, b.tau_sphere});
    }
  } else if (kind == "knu-profile") {
    header = {"t", "knu"};
    const auto k = knu_values(m, pr.p, pr.u, c.r, c.ode);
    for (std::size_t i = 0; i < k.size(); ++i) rows.push_back({c.r[i], k[i]});
  } else {
    throw UsageError("unknown sweep kind '" + kind + "'\n" + kSweepColumns);
  }
  fs::create_directories(c.out);
  const fs::path path = fs::path(c.out) / ("sweep_" + kind + ".csv");
  std::ofstream out(path);
  write_csv(out, {timestamp_line(c), "config: " + resolved_json(c).dump()}, header, rows);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  std::cout << path.string() << "\n";
  return kExitOk;
}

Json comparison(const char* name, double fitted, double uncertainty, double predicted) {
  return Json{{"coefficient", name},
              {"fitted", json_number(fitted)},
              {"uncertainty", json_number(uncertainty)},
              {"predicted", json_number(predicted)},
              {"difference", json_number(fitted - predicted)}};
}

int cmd_series(RunConfig& c, const ModelInstance& inst) {
  const MetricModel& m = *inst.model;
  const Probe pr = probe(c, inst);
  SeriesGrid grid = SeriesGrid::for_working_radius(inst.working_radius);
  if (!c.r.empty()) {
    if (c.r.size() != 2 || !(c.r[0] > 0 && c.r[1] > c.r[0] && c.r[1] <= inst.working_radius))
      throw UsageError("series: --r takes the grid bounds lo,hi with 0 < lo < hi <= working radius");
    grid.r_lo = c.r[0];
    grid.r_hi = c.r[1];
  }
  c.r = {grid.r_lo, grid.r_hi};
  const RadialProfile prof = radial_profile(m, pr.p, pr.u, grid, c.ode);
  const SeriesFit a = theta_series(prof, c.kmax_theta);
  const SeriesFit b = tauS_theta_series(prof, c.kmax_taus);
  const SeriesPrediction s = series_prediction(m, pr.p, pr.u);

  Json cmp = Json::array({comparison("a0", a.coeff(0), a.uncertainty(0), 1.0),
                          comparison("a1", a.coeff(1), a.uncertainty(1), 0.0),
                          comparison("a2", a.coeff(2), a.uncertainty(2), s.a2),
                          comparison("a3", a.coeff(3), a.uncertainty(3), s.a3),
                          comparison("b-2", b.coeff(-2), b.uncertainty(-2), s.b_m2),
                          comparison("b-1", b.coeff(-1), b.uncertainty(-1), s.b_m1),
                          comparison("b0", b.coeff(0), b.uncertainty(0), s.b0),
                          comparison("b1", b.coeff(1), b.uncertainty(1), s.b1)});
  Json rec = Json::object();
  try {
    require_cyclic_parallel(m, pr.p);
    const RicciJet j = ricci_jet(m, pr.p);
    const double C = pr.u.dot(j.ricci * pr.u) - j.tau;
    Json res = Json::array();
    for (int k = 0; k <= 2; ++k) res.push_back(Json{{"k", k}, {"residual", json_number(recursion_residual(a, b, C, k))}});
    rec = Json{{"C", C}, {"residuals", res}};
  } catch (const DomainError& e) {
    rec = Json{{"refused", e.what()}};
  }
  const Json payload{{"model", m.name()},
                     {"point", vec_json(pr.p.coords)},
                     {"direction", vec_json(pr.u)},
                     {"theta", to_json(a)},
                     {"tau_sphere_theta", to_json(b)},
                     {"comparison", cmp},
                     {"recursion", rec}};
  fs::create_directories(c.out);
  write_json(fs::path(c.out) / "series.json", c, "series", payload);

  char line[160];
  std::snprintf(line, sizeof line, "%-6s %-24s %-12s %-24s\n", "coeff", "fitted", "uncertainty", "predicted");
  std::cout << line;
  for (const auto& row : cmp) {
    std::snprintf(line, sizeof line, "%-6s %-24.17g %-12.3e %-24.17g\n", row["coefficient"].get<std::string>().c_str(),
                  row["fitted"].get<double>(), row["uncertainty"].get<double>(), row["predicted"].get<double>());
    std::cout << line;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"datri-lab: total scalar curvature of geodesic spheres, hemispheres and tubes, and D'Atri diagnostics"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success (report: verdict matches the expected classification), 1 usage error or unknown\n"
      "model, 2 INVALID report or failed computation, 3 verdict does not match the expected classification.");

  RunConfig cfg;
  std::vector<std::string> param_args;
  std::vector<double> at_arg, axis_arg;
  std::string config_file;
  std::optional<double> length_arg;
  bool no_timestamp = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model, "registered model name");
    sub->add_option("--param", param_args, "model parameter override k=v (repeatable)");
    sub->add_option("--r", cfg.r, "radii grid (comma separated or repeated)")->delimiter(',');
    sub->add_option("--out", cfg.out, "output directory");
    sub->add_option("--config", config_file, "JSON config file; flags override its values");
    sub->add_option("--seed", cfg.seed, "seed of the direction sampler");
    sub->add_option("--point", cfg.point, "index of the model's base point");
    sub->add_option("--at", at_arg, "chart point x,y,z (overrides --point)")->delimiter(',')->expected(3);
    sub->add_option("--axis", axis_arg, "direction in the orthonormal frame at the point, x,y,z")
        ->delimiter(',')
        ->expected(3);
    sub->add_flag("--no-timestamp", no_timestamp, "omit the generation time from output files");
  };
  CLI::App* report = app.add_subcommand("report", "run the diagnostics battery; writes report.json and report.txt");
  CLI::App* sweep = app.add_subcommand("sweep", "tabulate one quantity over a grid; writes sweep_<kind>.csv");
  CLI::App* series = app.add_subcommand("series", "fit theta and tau^S theta series; writes series.json");
  for (CLI::App* s : {report, sweep, series}) common(s);
  sweep->add_option("--kind", cfg.kind, "sphere-total | hemisphere-total | tube-total | theta-profile | knu-profile");
  sweep->add_option("--length", length_arg, "tube-total: length of the geodesic axis (default: working radius)");
  sweep->footer(kSweepColumns);
  series->add_option("--kmax-theta", cfg.kmax_theta, "highest theta coefficient");
  series->add_option("--kmax-taus", cfg.kmax_taus, "highest tau^S theta coefficient");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* active = report->parsed() ? report : (sweep->parsed() ? sweep : series);
  const RunConfig flags = cfg;
  try {
    // config file first, then every flag given on the command line
    RunConfig c;
    c.command = active->get_name();
    if (!config_file.empty()) apply_config_file(c, config_file);
    auto given = [&](const char* name) { return active->count(name) > 0; };
    if (given("--model")) c.model = flags.model;
    if (given("--r")) c.r = flags.r;
    if (given("--out")) c.out = flags.out;
    if (given("--seed")) c.seed = flags.seed;
    if (given("--point")) c.point = flags.point;
    if (given("--at")) c.at = vec_from(at_arg, "--at");
    if (given("--axis")) c.axis = vec_from(axis_arg, "--axis");
    if (c.command == "sweep") {
      if (given("--kind")) c.kind = flags.kind;
      if (given("--length")) c.length = length_arg;
      if (c.kind.empty()) throw UsageError("sweep: --kind is required\n" + std::string(kSweepColumns));
    }
    if (c.command == "series") {
      if (given("--kmax-theta")) c.kmax_theta = flags.kmax_theta;
      if (given("--kmax-taus")) c.kmax_taus = flags.kmax_taus;
    }
    for (const auto& kv : param_args) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--param expects k=v, got '" + kv + "'");
      try {
        std::size_t used = 0;
        const double v = std::stod(kv.substr(eq + 1), &used);
        if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing characters");
        c.params[kv.substr(0, eq)] = v;
      } catch (const std::logic_error&) {
        throw UsageError("--param " + kv + ": value is not a number");
      }
    }
    c.timestamp = !no_timestamp;
    if (c.model.empty()) throw UsageError("--model is required\n" + register_builtin_models().help());

    const ModelRegistry reg = register_builtin_models();
    ModelInstance inst;
    try {
      inst = reg.instantiate(c.model, c.params);
    } catch (const ModelError& e) {
      throw UsageError(e.what());
    }
    c.params = inst.params;
    if (c.command == "report") return cmd_report(c, inst);
    if (c.command == "sweep") return cmd_sweep(c, inst);
    return cmd_series(c, inst);
  } catch (const UsageError& e) {
    std::cerr << "datri-lab: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "datri-lab: computation failed: " << e.what() << "\n";
    return kExitInvalid;
  }
}
