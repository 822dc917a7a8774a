#ifndef DATRI_BATTERY_HPP
#define DATRI_BATTERY_HPP

// The diagnostics battery: universal identities first, then the D'Atri tests,
// assembled into a DiagnosticsReport with an overall classification.

#include "datri/registry.hpp"
#include "datri/tube.hpp"

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace datri {

enum class TestCategory { universal, datri, apparatus, informational };
enum class TestVerdict { pass, fail, gray, error, info };
enum class Classification { datri_consistent, not_datri, inconsistent, inconclusive, invalid };

inline const char* to_string(TestCategory c) {
  switch (c) {
    case TestCategory::universal: return "universal";
    case TestCategory::datri: return "datri";
    case TestCategory::apparatus: return "apparatus";
    case TestCategory::informational: return "informational";
  }
  return "";
}

inline const char* to_string(TestVerdict v) {
  switch (v) {
    case TestVerdict::pass: return "PASS";
    case TestVerdict::fail: return "FAIL";
    case TestVerdict::gray: return "GRAY";
    case TestVerdict::error: return "ERROR";
    case TestVerdict::info: return "INFO";
  }
  return "";
}

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::datri_consistent: return "D'ATRI-CONSISTENT";
    case Classification::not_datri: return "NOT-D'ATRI";
    case Classification::inconsistent: return "INCONSISTENT";
    case Classification::inconclusive: return "INCONCLUSIVE";
    case Classification::invalid: return "INVALID";
  }
  return "";
}

struct Tolerances {
  double universal_relative = 1e-5;  // Gauss-Bonnet, capsule
  double steiner_absolute = 1e-5;
  double torus_scaled = 1e-5;        // |T| / max(1, integral |2K| dA)
  double datri_pass = 1e-4;
  double datri_fail = 1e-3;
  double cylinder_relative = 0.05;   // c3 against mean hat-a
  double cylinder_absolute = 2e-3;
};

/// Radii are fractions of the model's working radius unless stated otherwise.
struct BatteryConfig {
  unsigned seed = 0;
  std::vector<double> sphere_radii = {0.2, 0.4};  // absolute; 0.8 x working radius is appended
  int steiner_samples = 20;
  double capsule_radius = 0.3;
  double capsule_length = 0.5;
  double curve_radius = 0.6;   // coordinate circle through the frame at the base point
  double torus_radius = 0.15;
  int evenness_samples = 100;
  double probe_radius = 0.5;   // evenness and hemispheres
  int hemisphere_axes = 6;
  double tube_radius = 0.25;
  double tube_length = 1.0;
  double arc_angle = 2.0;
  int l3_samples = 100;
  int series_directions = 3;
  int geodesics = 3;           // cylinder coefficient and K(nu) profile
  double cylinder_length = 0.5;
  double knu_half_width = 0.4;
  int knu_points = 9;
  SphereSettings sphere{};
  TubeSettings tube{};
  Tolerances tol{};
};

struct TestRecord {
  std::string name;
  TestCategory category = TestCategory::informational;
  std::string inputs;
  std::vector<double> values;  // per-sample measurements, in sampling order
  double defect = 0.0;
  double tolerance = 0.0;
  double fail_threshold = 0.0;  // D'Atri tests only
  TestVerdict verdict = TestVerdict::info;
  std::string note;
};

struct DiagnosticsReport {
  std::string model;
  Params params;
  double working_radius = 0.0;
  std::vector<ChartPoint> base_points;
  DatriExpectation expected = DatriExpectation::unknown;
  std::string expected_provenance;
  BatteryConfig config;
  std::vector<TestRecord> tests;
  Classification classification = Classification::inconclusive;
  std::string failing_test;

  const TestRecord* find(const std::string& name) const {
    for (const auto& t : tests)
      if (t.name == name) return &t;
    return nullptr;
  }

  bool matches_expected() const {
    switch (expected) {
      case DatriExpectation::yes: return classification == Classification::datri_consistent;
      case DatriExpectation::no: return classification == Classification::not_datri;
      case DatriExpectation::unknown: return classification != Classification::invalid;
    }
    return false;
  }
};

// ---------------------------------------------------------------------------

/// max over sampled unit u of |theta(r u) - theta(-r u)|; directions from the
/// Halton sequence in an orthonormal frame at p.
inline double evenness_defect(const MetricModel& model, const ChartPoint& p, double r, int sample_size,
                              unsigned seed = 0, const OdeSettings& ode = {}) {
  const Mat3 frame = orthonormal_frame(model.metric(p.coords), Vec3::UnitX());
  const auto dirs = halton_directions(static_cast<std::size_t>(sample_size), seed);
  const auto d = parallel_map(dirs.size(), [&](std::size_t i) {
    const Vec3 u = frame * dirs[i];
    return std::abs(volume_density(jacobi_along(model, p, u, r, ode)) -
                    volume_density(jacobi_along(model, p, Vec3(-u), r, ode)));
  });
  double worst = 0.0;
  for (double v : d) worst = std::max(worst, v);
  return worst;
}

/// Coordinate circle of radius R through the orthonormal frame at p (R is roughly a metric length).
inline ChartCircle frame_circle(const MetricModel& model, const ChartPoint& p, double R, double a = 0.0,
                                double b = 2 * kPi) {
  const Mat3 f = orthonormal_frame(model.metric(p.coords), Vec3::UnitX());
  return ChartCircle(p.coords, f.col(0), f.col(1), R, a, b);
}

/// Overall verdict from the per-test verdicts; INVALID names the first failing hard test.
inline void classify(DiagnosticsReport& rep) {
  for (const auto& t : rep.tests) {
    const bool hard = t.category == TestCategory::universal || t.category == TestCategory::apparatus;
    if (t.verdict == TestVerdict::error || (hard && t.verdict == TestVerdict::fail)) {
      rep.classification = Classification::invalid;
      rep.failing_test = t.name;
      return;
    }
  }
  bool any_pass = false, any_fail = false, all_pass = true;
  for (const auto& t : rep.tests) {
    if (t.category != TestCategory::datri) continue;
    any_pass |= t.verdict == TestVerdict::pass;
    any_fail |= t.verdict == TestVerdict::fail;
    all_pass &= t.verdict == TestVerdict::pass;
  }
  bool core_fail = true;
  for (const char* name : {"theta_evenness", "hemisphere_equality", "tube_zero"}) {
    const TestRecord* t = rep.find(name);
    core_fail &= t != nullptr && t->verdict == TestVerdict::fail;
  }
  if (all_pass)
    rep.classification = Classification::datri_consistent;
  else if (any_pass && any_fail)
    rep.classification = Classification::inconsistent;
  else if (core_fail)
    rep.classification = Classification::not_datri;
  else
    rep.classification = Classification::inconclusive;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline TestVerdict datri_verdict(double defect, const Tolerances& tol) {
  if (defect < tol.datri_pass) return TestVerdict::pass;
  if (defect > tol.datri_fail) return TestVerdict::fail;
  return TestVerdict::gray;
}

class BatteryRun {
 public:
  BatteryRun(const ModelInstance& inst, const BatteryConfig& cfg)
      : m_(*inst.model), inst_(inst), cfg_(cfg), wr_(inst.working_radius) {}

  DiagnosticsReport run() {
    DiagnosticsReport rep;
    rep.model = m_.name();
    rep.params = inst_.params;
    rep.working_radius = wr_;
    rep.base_points = inst_.base_points;
    rep.expected = inst_.entry->expected;
    rep.expected_provenance = inst_.entry->provenance;
    rep.config = cfg_;

    // universal identities
    add(rep, "gauss_bonnet_sphere", TestCategory::universal, [&](TestRecord& t) { gauss_bonnet(t); });
    add(rep, "steiner_identity", TestCategory::universal, [&](TestRecord& t) { steiner(t); });
    add(rep, "capsule_closure", TestCategory::universal, [&](TestRecord& t) { capsule(t); });
    add(rep, "torus_closure", TestCategory::universal, [&](TestRecord& t) { torus(t); });
    // D'Atri tests
    add(rep, "theta_evenness", TestCategory::datri, [&](TestRecord& t) { evenness(t); });
    add(rep, "hemisphere_4pi", TestCategory::datri, [&](TestRecord& t) { hemispheres(t, false); });
    add(rep, "hemisphere_equality", TestCategory::datri, [&](TestRecord& t) { hemispheres(t, true); });
    add(rep, "tube_zero", TestCategory::datri, [&](TestRecord& t) { tube_zero(t); });
    add(rep, "ledger_l3", TestCategory::datri, [&](TestRecord& t) { ledger(t); });
    add(rep, "odd_theta_coefficients", TestCategory::datri, [&](TestRecord& t) { odd_coefficients(t); });
    add(rep, "cylinder_c3_constancy", TestCategory::datri, [&](TestRecord& t) { cylinder(t); });
    add(rep, "knu_constant_profile", TestCategory::datri, [&](TestRecord& t) { knu(t); });
    // cross-checks and measurements
    add(rep, "cylinder_c3_vs_hat_a", TestCategory::apparatus, [&](TestRecord& t) { cylinder_apparatus(t); });
    add(rep, "tau_sphere_evenness", TestCategory::informational, [&](TestRecord& t) { tau_sphere_even(t); });
    add(rep, "sphere_total_spread", TestCategory::informational, [&](TestRecord& t) { sphere_spread(t); });

    classify(rep);
    return rep;
  }

 private:
  const MetricModel& m_;
  const ModelInstance& inst_;
  const BatteryConfig& cfg_;
  double wr_;

  // shared between tests
  std::vector<double> gb_totals_;
  std::vector<double> gb_radii_;
  std::vector<double> tau_sphere_odd_;
  std::vector<double> hemi_plus_, hemi_minus_;
  std::vector<CylinderFit> cylinders_;

  const ChartPoint& base(std::size_t i) const { return inst_.base_points[i % inst_.base_points.size()]; }
  Mat3 frame(const ChartPoint& p) const { return orthonormal_frame(m_.metric(p.coords), Vec3::UnitX()); }

  template <class F>
  void add(DiagnosticsReport& rep, std::string name, TestCategory cat, F&& body) {
    TestRecord t;
    t.name = std::move(name);
    t.category = cat;
    try {
      body(t);
      if (cat == TestCategory::universal || cat == TestCategory::apparatus)
        t.verdict = t.defect <= t.tolerance ? TestVerdict::pass : TestVerdict::fail;
      else if (cat == TestCategory::datri) {
        t.tolerance = cfg_.tol.datri_pass;
        t.fail_threshold = cfg_.tol.datri_fail;
        t.verdict = datri_verdict(t.defect, cfg_.tol);
      } else
        t.verdict = TestVerdict::info;
    } catch (const std::exception& e) {
      t.verdict = TestVerdict::error;
      t.note = e.what();
    }
    rep.tests.push_back(std::move(t));
  }

  void gauss_bonnet(TestRecord& t) {
    gb_radii_.clear();
    for (double r : cfg_.sphere_radii)
      if (r <= wr_) gb_radii_.push_back(r);
    const double r_wide = 0.8 * wr_;
    if (std::find_if(gb_radii_.begin(), gb_radii_.end(), [&](double r) { return std::abs(r - r_wide) < 1e-12; }) ==
        gb_radii_.end())
      gb_radii_.push_back(r_wide);
    t.inputs = "all base points; r in {";
    for (std::size_t i = 0; i < gb_radii_.size(); ++i) t.inputs += (i ? ", " : "") + fmt(gb_radii_[i]);
    t.inputs += "}; value = total / (8 pi) - 1";
    double worst = 0.0;
    gb_totals_.clear();
    for (const auto& p : inst_.base_points)
      for (double r : gb_radii_) {
        const double total = total_scalar_sphere(m_, p, r, cfg_.sphere);
        gb_totals_.push_back(total);
        const double rel = total / (8 * kPi) - 1.0;
        t.values.push_back(rel);
        worst = std::max(worst, std::abs(rel));
      }
    t.defect = worst;
    t.tolerance = cfg_.tol.universal_relative;
  }

  void steiner(TestRecord& t) {
    const int n = cfg_.steiner_samples;
    const auto dirs = halton_directions(static_cast<std::size_t>(n), cfg_.seed + 1);
    t.inputs = std::to_string(n) + " (u, r) samples cycling over base points; r in [0.1, 0.8] x working radius";
    const auto res = parallel_map(dirs.size(), [&](std::size_t i) {
      const ChartPoint& p = base(i);
      const double r = wr_ * (0.1 + 0.7 * (static_cast<double>(i) + 0.5) / n);
      return steiner_residual(m_, p, frame(p) * dirs[i], r, cfg_.sphere.ode);
    });
    t.values = res;
    for (double v : res) t.defect = std::max(t.defect, std::abs(v));
    t.tolerance = cfg_.tol.steiner_absolute;
  }

  void capsule(TestRecord& t) {
    const ChartPoint& p = base(0);
    const Mat3 f = frame(p);
    const double r = cfg_.capsule_radius * wr_;
    const GeodesicCurve axis(p, f.col(0), cfg_.capsule_length * wr_);
    const ChartCircle arc = frame_circle(m_, p, cfg_.curve_radius * wr_, 0.0, 1.5);
    t.inputs = "geodesic segment of length " + fmt(cfg_.capsule_length * wr_) + " and coordinate arc of angle 1.5, r = " +
               fmt(r) + "; value = total / (8 pi) - 1";
    for (const RegularCurve* c : {static_cast<const RegularCurve*>(&axis), static_cast<const RegularCurve*>(&arc)}) {
      const double rel = capsule_total(m_, *c, r, cfg_.tube, cfg_.sphere) / (8 * kPi) - 1.0;
      t.values.push_back(rel);
      t.defect = std::max(t.defect, std::abs(rel));
    }
    t.tolerance = cfg_.tol.universal_relative;
  }

  void torus(TestRecord& t) {
    const double R = cfg_.curve_radius * wr_, r = cfg_.torus_radius * wr_;
    t.inputs = "closed coordinate circle of radius " + fmt(R) + " at base point 0, r = " + fmt(r) +
               "; value = total, defect = |total| / max(1, integral |2K| dA)";
    const TubeTotal tt = total_scalar_tube_detailed(m_, frame_circle(m_, base(0), R), r, cfg_.tube);
    t.values = {tt.total, tt.absolute_total};
    t.defect = std::abs(tt.total) / std::max(1.0, tt.absolute_total);
    t.tolerance = cfg_.tol.torus_scaled;
  }

  void evenness(TestRecord& t) {
    const double r = cfg_.probe_radius * wr_;
    const int n = cfg_.evenness_samples;
    t.inputs = std::to_string(n) + " directions at each base point, r = " + fmt(r) +
               "; value = max |theta(ru) - theta(-ru)| per base point";
    tau_sphere_odd_.clear();
    for (std::size_t b = 0; b < inst_.base_points.size(); ++b) {
      const ChartPoint& p = inst_.base_points[b];
      const Mat3 f = frame(p);
      const auto dirs = halton_directions(static_cast<std::size_t>(n), cfg_.seed + 7 * static_cast<unsigned>(b));
      const auto pairs = parallel_map(dirs.size(), [&](std::size_t i) {
        const Vec3 u = f * dirs[i];
        const SphereNode a = sphere_node(m_, p, u, r, cfg_.sphere.ode);
        const SphereNode c = sphere_node(m_, p, Vec3(-u), r, cfg_.sphere.ode);
        return std::pair<double, double>(std::abs(a.theta - c.theta), std::abs(a.tau_sphere - c.tau_sphere));
      });
      double worst = 0.0, worst_tau = 0.0;
      for (const auto& [d, dt] : pairs) {
        worst = std::max(worst, d);
        worst_tau = std::max(worst_tau, dt);
      }
      t.values.push_back(worst);
      tau_sphere_odd_.push_back(worst_tau);
      t.defect = std::max(t.defect, worst);
    }
  }

  void hemispheres(TestRecord& t, bool equality) {
    const double r = cfg_.probe_radius * wr_;
    const ChartPoint& p = base(0);
    if (hemi_plus_.empty()) {
      const Mat3 f = frame(p);
      for (const Vec3& w : halton_directions(static_cast<std::size_t>(cfg_.hemisphere_axes), cfg_.seed + 3)) {
        hemi_plus_.push_back(total_scalar_hemisphere(m_, TangentVector{p, r * (f * w)}, cfg_.sphere));
        hemi_minus_.push_back(total_scalar_hemisphere(m_, TangentVector{p, -r * (f * w)}, cfg_.sphere));
      }
    }
    t.inputs = std::to_string(cfg_.hemisphere_axes) + " axes v at base point 0, |v| = " + fmt(r) +
               (equality ? "; value = H(v) - H(-v)" : "; value = H(v) - 4 pi for v and -v");
    for (std::size_t i = 0; i < hemi_plus_.size(); ++i) {
      if (equality) {
        t.values.push_back(hemi_plus_[i] - hemi_minus_[i]);
      } else {
        t.values.push_back(hemi_plus_[i] - 4 * kPi);
        t.values.push_back(hemi_minus_[i] - 4 * kPi);
      }
    }
    for (double v : t.values) t.defect = std::max(t.defect, std::abs(v));
  }

  void tube_zero(TestRecord& t) {
    const ChartPoint& p = base(0);
    const double r = cfg_.tube_radius * wr_;
    const GeodesicCurve axis(p, frame(p).col(0), cfg_.tube_length * wr_);
    const ChartCircle arc = frame_circle(m_, p, cfg_.curve_radius * wr_, 0.0, cfg_.arc_angle);
    t.inputs = "geodesic axis of length " + fmt(cfg_.tube_length * wr_) + " and coordinate arc of radius " +
               fmt(cfg_.curve_radius * wr_) + ", angle " + fmt(cfg_.arc_angle) + ", r = " + fmt(r) +
               "; value = tube total";
    for (const RegularCurve* c : {static_cast<const RegularCurve*>(&axis), static_cast<const RegularCurve*>(&arc)}) {
      const double total = total_scalar_tube(m_, *c, r, cfg_.tube);
      t.values.push_back(total);
      t.defect = std::max(t.defect, std::abs(total));
    }
  }

  void ledger(TestRecord& t) {
    t.inputs = std::to_string(cfg_.l3_samples) +
               " directions at each base point; value = max(|nabla_u rho(u,u)|, |nabla_u tau|) per base point";
    for (std::size_t b = 0; b < inst_.base_points.size(); ++b) {
      const ChartPoint& p = inst_.base_points[b];
      const RicciJet j = ricci_jet(m_, p);
      const Mat3 f = orthonormal_frame(j.g, Vec3::UnitX());
      double worst = 0.0;
      for (const Vec3& w : halton_directions(static_cast<std::size_t>(cfg_.l3_samples), cfg_.seed + 11 + static_cast<unsigned>(b))) {
        const Vec3 u = f * w;
        worst = std::max({worst, std::abs(j.nabla_ricci_uuu(u)), std::abs(j.nabla_tau_u(u))});
      }
      t.values.push_back(worst);
      t.defect = std::max(t.defect, worst);
    }
  }

  void odd_coefficients(TestRecord& t) {
    const ChartPoint& p = base(0);
    const Mat3 f = frame(p);
    const SeriesGrid grid = SeriesGrid::for_working_radius(wr_);
    t.inputs = std::to_string(cfg_.series_directions) +
               " directions at base point 0, theta fitted to order 10 on 12 radii in [0.05, 0.5] x working radius; "
               "values = (a1, a3) per direction";
    for (const Vec3& w : halton_directions(static_cast<std::size_t>(cfg_.series_directions), cfg_.seed + 5)) {
      const SeriesFit a = theta_series(m_, p, f * w, kThetaSeriesOrder, grid, cfg_.sphere.ode);
      t.values.push_back(a.coeff(1));
      t.values.push_back(a.coeff(3));
      t.defect = std::max({t.defect, std::abs(a.coeff(1)), std::abs(a.coeff(3))});
    }
  }

  void ensure_cylinders() {
    if (!cylinders_.empty()) return;
    const auto grid = cylinder_radius_grid(wr_);
    for (int g = 0; g < cfg_.geodesics; ++g) {
      const ChartPoint& p = base(static_cast<std::size_t>(g));
      const Vec3 w = halton_directions(1, cfg_.seed + 13 + static_cast<unsigned>(g))[0];
      cylinders_.push_back(cylinder_coefficient(m_, p, frame(p) * w, cfg_.cylinder_length * wr_, grid, cfg_.tube));
    }
  }

  void cylinder(TestRecord& t) {
    ensure_cylinders();
    t.inputs = std::to_string(cfg_.geodesics) + " geodesics of length " + fmt(cfg_.cylinder_length * wr_) +
               " (one per base point), r in {0.08..0.24} x working radius; value = fitted c3; defect = max - min";
    double lo = 1e300, hi = -1e300;
    for (const auto& c : cylinders_) {
      t.values.push_back(c.c3);
      lo = std::min(lo, c.c3);
      hi = std::max(hi, c.c3);
    }
    t.defect = hi - lo;
  }

  void cylinder_apparatus(TestRecord& t) {
    ensure_cylinders();
    t.inputs = "same geodesics as cylinder_c3_constancy; values = (c3, mean hat-a) per geodesic; "
               "defect = max |c3 - mean| - (5% |mean| + 2e-3), pass if <= 0";
    double worst = -1e300;
    for (const auto& c : cylinders_) {
      t.values.push_back(c.c3);
      t.values.push_back(c.mean_hat_a);
      const double allowed = cfg_.tol.cylinder_relative * std::abs(c.mean_hat_a) + cfg_.tol.cylinder_absolute;
      worst = std::max(worst, std::abs(c.c3 - c.mean_hat_a) - allowed);
    }
    t.defect = worst;
    t.tolerance = 0.0;
  }

  void knu(TestRecord& t) {
    const double h = cfg_.knu_half_width * wr_;
    std::vector<double> grid;
    for (int i = 0; i < cfg_.knu_points; ++i) grid.push_back(-h + 2 * h * i / (cfg_.knu_points - 1));
    t.inputs = std::to_string(cfg_.geodesics) + " geodesics (one per base point), t in [-" + fmt(h) + ", " + fmt(h) +
               "], " + std::to_string(cfg_.knu_points) + " points; values = (a, b) per geodesic; defect = max(|a|, |b|)";
    for (int g = 0; g < cfg_.geodesics; ++g) {
      const ChartPoint& p = base(static_cast<std::size_t>(g));
      const Vec3 w = halton_directions(1, cfg_.seed + 13 + static_cast<unsigned>(g))[0];
      const SeriesFit k = knu_profile(m_, p, frame(p) * w, grid, cfg_.sphere.ode);
      t.values.push_back(k.coeff(2));
      t.values.push_back(k.coeff(1));
      t.defect = std::max({t.defect, std::abs(k.coeff(2)), std::abs(k.coeff(1))});
    }
  }

  void tau_sphere_even(TestRecord& t) {
    t.inputs = "same samples as theta_evenness; value = max |tau^S(ru) - tau^S(-ru)| per base point";
    t.values = tau_sphere_odd_;
    for (double v : t.values) t.defect = std::max(t.defect, v);
    t.note = "measurement only; no implication about the D'Atri property is claimed";
  }

  void sphere_spread(TestRecord& t) {
    t.inputs = "totals of gauss_bonnet_sphere grouped by radius; value = max - min over base points";
    const std::size_t nr = gb_radii_.size();
    if (nr == 0 || gb_totals_.size() != nr * inst_.base_points.size())
      throw Error("sphere totals unavailable");
    for (std::size_t k = 0; k < nr; ++k) {
      double lo = 1e300, hi = -1e300;
      for (std::size_t b = 0; b < inst_.base_points.size(); ++b) {
        lo = std::min(lo, gb_totals_[b * nr + k]);
        hi = std::max(hi, gb_totals_[b * nr + k]);
      }
      t.values.push_back(hi - lo);
      t.defect = std::max(t.defect, hi - lo);
    }
    t.note = "in dimension 3 every sphere total is 8 pi by Gauss-Bonnet, so this spread carries no information "
             "about the higher-dimensional question of equal sphere totals";
  }
};

}  // namespace detail

/// Runs the full battery on a registered model instance.
inline DiagnosticsReport run_battery(const ModelInstance& inst, const BatteryConfig& cfg = {}) {
  return detail::BatteryRun(inst, cfg).run();
}

inline DiagnosticsReport run_battery(const ModelRegistry& reg, const std::string& name, const Params& params = {},
                                     const BatteryConfig& cfg = {}) {
  const ModelInstance inst = reg.instantiate(name, params);
  return run_battery(inst, cfg);
}

}  // namespace datri

#endif  // DATRI_BATTERY_HPP
