#ifndef DATRI_TUBE_HPP
#define DATRI_TUBE_HPP

// Tubes about regular curves: induced geometry of the tube surface, its total
// scalar curvature, capsules closed by geodesic hemispheres, the r^3 cylinder
// coefficient and the normal-plane sectional curvature profile along geodesics.

#include "datri/sphere.hpp"

#include <vector>

namespace datri {

struct TubeSettings {
  int t_nodes = 32;
  int phi_nodes = 64;
  OdeSettings ode{};
};

/// Tube surface data at one (t, phi) node. Coordinates on the tube are (t, phi);
/// II is taken with respect to the outward radial normal.
struct TubeNode {
  Vec3 point = Vec3::Zero();
  Mat2 first_form = Mat2::Identity();
  Mat2 second_form = Mat2::Zero();
  double ambient_sectional = 0.0;  // K of the tangent plane of the tube
  double gauss_curvature = 0.0;
  double area_element = 0.0;  // sqrt(det I)
  Mat2 A = Mat2::Zero();      // Jacobi fields J_t, J_phi in the radial parallel frame
};

/// Geometry of the tube of radius r at the point exp_{c(s)}(r E(s, phi)), given
/// the normal frame of the axis at s.
inline TubeNode tube_geometry_at(const MetricModel& model, const CurveFrame& f, double phi, double r,
                                 const OdeSettings& ode = {}) {
  const Mat3 g = model.metric(f.position);
  const double speed = std::sqrt(f.velocity.dot(g * f.velocity));
  const Vec3& t_hat = f.frame[0];
  const Vec3 e = std::cos(phi) * f.frame[1] + std::sin(phi) * f.frame[2];
  const Vec3 e_phi = -std::sin(phi) * f.frame[1] + std::cos(phi) * f.frame[2];

  // J_t(0) = c'(s), J_t'(0) = D_s E = -<E, D_s T> T;  J_phi(0) = 0, J_phi'(0) = d_phi E
  JacobiInitial init;
  init.e2 = t_hat;
  init.e3 = e_phi;
  init.A << speed, 0.0, 0.0, 0.0;
  init.Aprime << -e.dot(g * f.covariant_acceleration) / speed, 0.0, 0.0, 1.0;

  JacobiTransport j;
  try {
    j = jacobi_transport(model, ChartPoint(f.position), e, r, init, ode);
  } catch (const ConjugatePointError&) {
    throw ImmersionError("tube: det I <= 0, radius too large for an immersed tube");
  }
  TubeNode n;
  n.point = j.position;
  n.A = j.A;
  n.first_form = j.A.transpose() * j.A;
  n.second_form = j.Aprime.transpose() * j.A;
  const double det_i = n.first_form.determinant();
  if (!(det_i > 0)) throw ImmersionError("tube: det I <= 0, radius too large for an immersed tube");
  n.ambient_sectional = j.tangent_sectional;
  const Mat2 ii = 0.5 * (n.second_form + n.second_form.transpose());
  n.gauss_curvature = n.ambient_sectional + ii.determinant() / det_i;
  n.area_element = std::abs(j.A.determinant());
  return n;
}

/// Unit tangent plus a normal frame at the curve start, orthonormal in g.
inline std::array<Vec3, 3> curve_seed_frame(const MetricModel& model, const RegularCurve& curve) {
  const Mat3 f = orthonormal_frame(model.metric(curve.start_position()), curve.start_velocity());
  return {f.col(0), f.col(1), f.col(2)};
}

/// Normal frames of the axis at the Gauss-Legendre nodes of [a, b].
inline std::vector<CurveFrame> tube_axis_frames(const MetricModel& model, const RegularCurve& curve,
                                                const Rule1D& t_rule, const OdeSettings& ode) {
  return frames_along(model, curve, curve_seed_frame(model, curve), t_rule.nodes, FrameTransport::normal_bundle,
                      ode);
}

struct TubeTotal {
  double total = 0.0;           // integral of 2K dA
  double absolute_total = 0.0;  // integral of |2K| dA
  double area = 0.0;
  double max_second_form_asymmetry = 0.0;
};

inline TubeTotal total_scalar_tube_detailed(const MetricModel& model, const RegularCurve& curve, double r,
                                            const TubeSettings& s = {}) {
  const Rule1D t_rule = gauss_legendre(s.t_nodes, curve.a(), curve.b());
  const Rule1D phi_rule = trapezoid_periodic(s.phi_nodes);
  const auto frames = tube_axis_frames(model, curve, t_rule, s.ode);
  const std::size_t nt = t_rule.nodes.size(), nphi = phi_rule.nodes.size();
  const auto nodes = parallel_map(nt * nphi, [&](std::size_t k) {
    return tube_geometry_at(model, frames[k / nphi], phi_rule.nodes[k % nphi], r, s.ode);
  });
  KahanSum total, abs_total, area;
  double asym = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double w = t_rule.weights[k / nphi] * phi_rule.weights[k % nphi];
    const TubeNode& n = nodes[k];
    total.add(w * 2.0 * n.gauss_curvature * n.area_element);
    abs_total.add(w * 2.0 * std::abs(n.gauss_curvature) * n.area_element);
    area.add(w * n.area_element);
    asym = std::max(asym, std::abs(n.second_form(0, 1) - n.second_form(1, 0)));
  }
  return {total.value(), abs_total.value(), area.value(), asym};
}

/// Total scalar curvature of the tube of radius r about the curve.
inline double total_scalar_tube(const MetricModel& model, const RegularCurve& curve, double r,
                                const TubeSettings& s = {}) {
  return total_scalar_tube_detailed(model, curve, r, s).total;
}

struct CapsuleTotal {
  double tube = 0.0;
  double start_cap = 0.0;  // hemisphere S+(-r c'(a)/|c'(a)|)
  double end_cap = 0.0;    // hemisphere S+( r c'(b)/|c'(b)|)
  double total() const { return tube + start_cap + end_cap; }
};

/// Tube closed by the two geodesic hemispheres at the axis endpoints (8 pi for every metric).
inline CapsuleTotal capsule_total_detailed(const MetricModel& model, const RegularCurve& curve, double r,
                                           const TubeSettings& ts = {}, const SphereSettings& ss = {}) {
  const auto ends = frames_along(model, curve, curve_seed_frame(model, curve), {curve.a(), curve.b()},
                                 FrameTransport::normal_bundle, ts.ode);
  CapsuleTotal c;
  c.tube = total_scalar_tube(model, curve, r, ts);
  c.start_cap = total_scalar_hemisphere(model, TangentVector{ChartPoint(ends[0].position), -r * ends[0].frame[0]}, ss);
  c.end_cap = total_scalar_hemisphere(model, TangentVector{ChartPoint(ends[1].position), r * ends[1].frame[0]}, ss);
  return c;
}

inline double capsule_total(const MetricModel& model, const RegularCurve& curve, double r,
                            const TubeSettings& ts = {}, const SphereSettings& ss = {}) {
  return capsule_total_detailed(model, curve, r, ts, ss).total();
}

// ---------------------------------------------------------------------------
// Cylinder coefficient

/// hat-a = nabla^2_11 tau - 2 nabla^2_11 rho_11 at (p, u).
inline double cylinder_hat_a(const MetricModel& model, const ChartPoint& p, const Vec3& u) {
  const auto [d2tau, d2rho] = second_radial_derivatives(model, p, u);
  return d2tau - 2.0 * d2rho;
}

struct CylinderFit {
  double c3 = 0.0;  // T(r) / (2 pi L) ~ c3 r^3 / 6 + c5 r^5
  double c5 = 0.0;
  double c3_uncertainty = 0.0;
  double residual = 0.0;  // max abs misfit of T / (2 pi L)
  double mean_hat_a = 0.0;
  double length = 0.0;
  std::vector<double> radii;
  std::vector<double> totals;
};

/// {0.08, 0.12, 0.16, 0.20, 0.24} x working radius.
inline std::vector<double> cylinder_radius_grid(double working_radius) {
  return {0.08 * working_radius, 0.12 * working_radius, 0.16 * working_radius, 0.20 * working_radius,
          0.24 * working_radius};
}

inline constexpr double kCylinderFitTolerance = 1e-6;

/// Fits the r^3 coefficient of cylinder totals about the geodesic of length L
/// from (p, u) and compares it with the axis average of hat-a.
inline CylinderFit cylinder_coefficient(const MetricModel& model, const ChartPoint& p, const Vec3& u,
                                        double length, const std::vector<double>& r_grid,
                                        const TubeSettings& s = {}) {
  require_unit(model.metric(p.coords), u, "cylinder_coefficient");
  const GeodesicCurve axis(p, u, length);
  CylinderFit fit;
  fit.length = length;
  fit.radii = r_grid;
  std::vector<double> scaled;
  for (double r : r_grid) {
    const double t = total_scalar_tube(model, axis, r, s);
    fit.totals.push_back(t);
    scaled.push_back(t / (2.0 * kPi * length));
  }
  const PowerFit pf = fit_powers(r_grid, scaled, {3, 5});
  fit.c3 = 6.0 * pf.coefficients[0];
  fit.c5 = pf.coefficients[1];
  fit.c3_uncertainty = 6.0 * pf.uncertainties[0];
  fit.residual = pf.residual;
  if (fit.residual > kCylinderFitTolerance)
    throw FitError("cylinder_coefficient: r^3 + r^5 model does not fit the tube totals (residual " +
                   std::to_string(fit.residual) + ")");

  const GeodesicPath path(model, TangentVector{p, u}, length, s.ode);
  const Rule1D rule = gauss_legendre(s.t_nodes, 0.0, length);
  KahanSum acc;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const auto st = path.state_at(rule.nodes[i]);
    acc.add(rule.weights[i] * cylinder_hat_a(model, ChartPoint(st.position), st.velocity));
  }
  fit.mean_hat_a = acc.value() / length;
  return fit;
}

// ---------------------------------------------------------------------------
// Normal-plane sectional curvature along a geodesic

/// K(nu(t)) = tau(gamma(t))/2 - rho(gamma'(t), gamma'(t)) at the given t (any sign).
inline std::vector<double> knu_values(const MetricModel& model, const ChartPoint& p, const Vec3& u,
                                      const std::vector<double>& t_grid, const OdeSettings& ode = {}) {
  require_unit(model.metric(p.coords), u, "knu_profile");
  double t_pos = 0.0, t_neg = 0.0;
  for (double t : t_grid) {
    t_pos = std::max(t_pos, t);
    t_neg = std::max(t_neg, -t);
  }
  const GeodesicPath forward(model, TangentVector{p, u}, t_pos, ode);
  const GeodesicPath backward(model, TangentVector{p, -u}, t_neg, ode);
  std::vector<double> out;
  for (double t : t_grid) {
    const auto st = t >= 0 ? forward.state_at(t) : backward.state_at(-t);
    const CurvatureBundle b = curvature_at(model, ChartPoint(st.position));
    out.push_back(0.5 * b.tau - b.ricci_form(st.velocity, st.velocity));
  }
  return out;
}

/// Quadratic fit K(nu(t)) ~ c + b t + a t^2; coefficients k = 0, 1, 2 hold (c, b, a).
inline SeriesFit knu_profile(const MetricModel& model, const ChartPoint& p, const Vec3& u,
                             const std::vector<double>& t_grid, const OdeSettings& ode = {}) {
  const auto k = knu_values(model, p, u, t_grid, ode);
  const PowerFit pf = fit_powers(t_grid, k, {0, 1, 2});
  SeriesFit fit;
  fit.k_min = 0;
  fit.coefficients = pf.coefficients;
  fit.uncertainties = pf.uncertainties;
  fit.residual = pf.residual;
  fit.condition = pf.condition;
  fit.radii = t_grid;
  return fit;
}

}  // namespace datri

#endif  // DATRI_TUBE_HPP
