#ifndef DATRI_SPHERE_HPP
#define DATRI_SPHERE_HPP

// Scalar curvature of geodesic spheres and its integrals over spheres and
// hemispheres; the Steiner-type identity relating it to the volume density;
// Taylor/Laurent series of theta and tau^S theta and their coefficient recursion.

#include "datri/geodesic.hpp"
#include "datri/quadrature.hpp"
#include "datri/series.hpp"

#include <vector>

namespace datri {

/// Everything the sphere module derives from one radial Jacobi integration.
struct SphereNode {
  double r = 0.0;
  double theta = 1.0;
  double dtheta = 0.0;   // d/dr theta(r u)
  double d2theta = 0.0;  // d^2/dr^2 theta(r u)
  double tau_sphere = 0.0;
  double tau_ambient = 0.0;   // tau(gamma_u(r))
  double ricci_radial = 0.0;  // rho(gamma_u'(r), gamma_u'(r))
  Mat2 shape = Mat2::Zero();

  double mean_curvature() const { return shape.trace(); }
};

namespace detail {

inline double det_columns(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

}  // namespace detail

inline SphereNode sphere_node(const JacobiTransport& j) {
  SphereNode n;
  const double r = j.r;
  n.r = r;
  const Mat2 S = sphere_shape_operator(j);
  n.shape = 0.5 * (S + S.transpose());
  n.ricci_radial = j.radial_curvature.trace();
  n.tau_ambient = j.tau_end;
  const double H = n.shape.trace();
  // contracted Gauss equation for the sphere as a hypersurface
  n.tau_sphere = j.tau_end - 2.0 * n.ricci_radial + H * H - (n.shape * n.shape).trace();

  // radial derivatives of D = det A from A'' = -R_rad A
  const Mat2& A = j.A;
  const Mat2& Ap = j.Aprime;
  const Mat2 App = j.Asecond();
  const double D = A.determinant();
  const double D1 = detail::det_columns(Ap.col(0), A.col(1)) + detail::det_columns(A.col(0), Ap.col(1));
  const double D2 = detail::det_columns(App.col(0), A.col(1)) + 2.0 * detail::det_columns(Ap.col(0), Ap.col(1)) +
                    detail::det_columns(A.col(0), App.col(1));
  n.theta = volume_density(j);
  n.dtheta = D1 / (r * r) - 2.0 * D / (r * r * r);
  n.d2theta = D2 / (r * r) - 4.0 * D1 / (r * r * r) + 6.0 * D / (r * r * r * r);
  return n;
}

inline SphereNode sphere_node(const MetricModel& model, const ChartPoint& p, const Vec3& u, double r,
                              const OdeSettings& settings = {}) {
  return sphere_node(jacobi_along(model, p, u, r, settings));
}

/// tau^S(v): scalar curvature of the geodesic sphere S_p(|v|) at exp_p(v).
inline double tau_sphere(const MetricModel& model, const TangentVector& v, const OdeSettings& settings = {}) {
  const Mat3 g = model.metric(v.base.coords);
  const double r = std::sqrt(v.components.dot(g * v.components));
  if (!(r > 0)) throw DomainError("tau_sphere: zero vector");
  return sphere_node(model, v.base, v.components / r, r, settings).tau_sphere;
}

/// LHS - RHS of (rho(g',g') + tau^S - tau) theta = theta'' + 2(n-1) theta'/r + (n-1)(n-2) theta/r^2
/// with n = 3. Holds for every metric.
inline double steiner_residual(const SphereNode& n) {
  const double r = n.r;
  const double lhs = (n.ricci_radial + n.tau_sphere - n.tau_ambient) * n.theta;
  const double rhs = n.d2theta + 4.0 * n.dtheta / r + 2.0 * n.theta / (r * r);
  return lhs - rhs;
}

inline double steiner_residual(const MetricModel& model, const ChartPoint& p, const Vec3& u, double r,
                               const OdeSettings& settings = {}) {
  return steiner_residual(sphere_node(model, p, u, r, settings));
}

struct SphereSettings {
  int polar_nodes = 24;
  int azimuth_nodes = 48;
  OdeSettings ode{};
};

/// Integral of tau^S(r w) theta(r w) r^2 over the rule's unit directions w,
/// which are given in the orthonormal frame `frame` of T_pM.
inline double integrate_sphere_rule(const MetricModel& model, const ChartPoint& p, double r,
                                    const QuadratureRule& rule, const Mat3& frame,
                                    const OdeSettings& ode) {
  const auto values = parallel_map(rule.nodes.size(), [&](std::size_t i) {
    const Vec3 u = frame * rule.nodes[i];
    const SphereNode n = sphere_node(model, p, u, r, ode);
    return n.tau_sphere * n.theta * r * r;
  });
  KahanSum sum;
  for (std::size_t i = 0; i < values.size(); ++i) sum.add(rule.weights[i] * values[i]);
  return sum.value();
}

/// Total scalar curvature of the geodesic sphere S_p(r) (8 pi for every metric, by Gauss-Bonnet).
inline double total_scalar_sphere(const MetricModel& model, const ChartPoint& p, double r,
                                  const SphereSettings& s = {}) {
  const Mat3 frame = orthonormal_frame(model.metric(p.coords), Vec3::UnitX());
  return integrate_sphere_rule(model, p, r, full_sphere_rule(s.polar_nodes, s.azimuth_nodes), frame, s.ode);
}

/// Total scalar curvature of the geodesic hemisphere with axis v (radius |v|).
inline double total_scalar_hemisphere(const MetricModel& model, const TangentVector& v,
                                      const SphereSettings& s = {}) {
  const Mat3 g = model.metric(v.base.coords);
  const double r = std::sqrt(v.components.dot(g * v.components));
  if (!(r > 0)) throw DomainError("total_scalar_hemisphere: zero axis");
  const Mat3 frame = orthonormal_frame(g, Vec3::UnitX());
  const Vec3 axis = frame.transpose() * g * v.components / r;  // components in the frame
  return integrate_sphere_rule(model, v.base, r, hemisphere_rule(axis, s.polar_nodes, s.azimuth_nodes),
                               frame, s.ode);
}

// ---------------------------------------------------------------------------
// Series

struct SeriesGrid {
  double r_lo = 0.045;
  double r_hi = 0.45;
  int count = 12;

  /// [0.05, 0.5] x working radius.
  static SeriesGrid for_working_radius(double working_radius) {
    return SeriesGrid{0.05 * working_radius, 0.5 * working_radius, 12};
  }
};

/// Node data at +u and -u on every grid radius.
struct RadialProfile {
  std::vector<double> radii;
  std::vector<SphereNode> plus;
  std::vector<SphereNode> minus;
};

inline RadialProfile radial_profile(const MetricModel& model, const ChartPoint& p, const Vec3& u,
                                    const SeriesGrid& grid, const OdeSettings& ode = {}) {
  RadialProfile prof;
  prof.radii = geometric_grid(grid.r_lo, grid.r_hi, grid.count);
  const auto nodes = parallel_map(2 * prof.radii.size(), [&](std::size_t i) {
    const double r = prof.radii[i / 2];
    return sphere_node(model, p, (i % 2 == 0) ? u : Vec3(-u), r, ode);
  });
  for (std::size_t i = 0; i < nodes.size(); ++i) (i % 2 == 0 ? prof.plus : prof.minus).push_back(nodes[i]);
  return prof;
}

/// Taylor fit of theta(r u) = sum a_k r^k, k = 0..k_max.
inline SeriesFit theta_series(const RadialProfile& prof, int k_max) {
  std::vector<double> fp, fm;
  for (std::size_t i = 0; i < prof.radii.size(); ++i) {
    fp.push_back(prof.plus[i].theta);
    fm.push_back(prof.minus[i].theta);
  }
  return fit_even_odd(prof.radii, fp, fm, 0, k_max);
}

/// Laurent fit of tau^S(r u) theta(r u) = sum b_k r^k, k = -2..k_max.
inline SeriesFit tauS_theta_series(const RadialProfile& prof, int k_max) {
  std::vector<double> fp, fm;
  for (std::size_t i = 0; i < prof.radii.size(); ++i) {
    fp.push_back(prof.plus[i].tau_sphere * prof.plus[i].theta);
    fm.push_back(prof.minus[i].tau_sphere * prof.minus[i].theta);
  }
  return fit_even_odd(prof.radii, fp, fm, -2, k_max);
}

inline constexpr int kThetaSeriesOrder = 10;
inline constexpr int kTauSThetaSeriesOrder = 8;

inline SeriesFit theta_series(const MetricModel& model, const ChartPoint& p, const Vec3& u, int k_max,
                              const SeriesGrid& grid, const OdeSettings& ode = {}) {
  require_unit(model.metric(p.coords), u, "theta_series");
  return theta_series(radial_profile(model, p, u, grid, ode), k_max);
}

inline SeriesFit tauS_theta_series(const MetricModel& model, const ChartPoint& p, const Vec3& u, int k_max,
                                   const SeriesGrid& grid, const OdeSettings& ode = {}) {
  require_unit(model.metric(p.coords), u, "tauS_theta_series");
  return tauS_theta_series(radial_profile(model, p, u, grid, ode), k_max);
}

/// Curvature-tensor predictions for the leading coefficients at (p, u).
struct SeriesPrediction {
  double a2 = 0.0;     // -rho(u,u)/6
  double a3 = 0.0;     // -nabla_u rho(u,u)/12
  double b_m2 = 2.0;   // (n-1)(n-2)
  double b_m1 = 0.0;
  double b0 = 0.0;     // tau - 3 rho(u,u)
  double b1 = 0.0;     // nabla_u tau - 8/3 nabla_u rho(u,u)
};

inline SeriesPrediction series_prediction(const MetricModel& model, const ChartPoint& p, const Vec3& u) {
  const RicciJet j = ricci_jet(model, p);
  require_unit(j.g, u, "series_prediction");
  const double ruu = u.dot(j.ricci * u);
  const double druu = j.nabla_ricci_uuu(u);
  SeriesPrediction s;
  s.a2 = -ruu / 6.0;
  s.a3 = -druu / 12.0;
  s.b0 = j.tau - 3.0 * ruu;
  s.b1 = j.nabla_tau_u(u) - 8.0 / 3.0 * druu;
  return s;
}

inline constexpr double kLedgerTolerance = 1e-8;

/// Refuses unless nabla_w rho(w,w) and nabla tau vanish at p over a direction sample,
/// i.e. unless C(u) = rho(u,u) - tau is constant along geodesics through p.
inline void require_cyclic_parallel(const MetricModel& model, const ChartPoint& p) {
  const RicciJet j = ricci_jet(model, p);
  const Mat3 frame = orthonormal_frame(j.g, Vec3::UnitX());
  double worst = std::sqrt(j.nabla_tau.dot(j.g.inverse() * j.nabla_tau));
  for (const Vec3& w : halton_directions(64)) worst = std::max(worst, std::abs(j.nabla_ricci_uuu(frame * w)));
  if (worst > kLedgerTolerance)
    throw DomainError("recursion_residual: model fails the L3 / constant-tau test at this point (defect " +
                      std::to_string(worst) + ")");
}

/// a_{k+2} (k+n+1)(k+n) - (C a_k + b_k), n = 3, C = rho(u,u) - tau.
inline double recursion_residual(const SeriesFit& a, const SeriesFit& b, double C, int k) {
  return a.coeff(k + 2) * (k + 4.0) * (k + 3.0) - (C * a.coeff(k) + b.coeff(k));
}

inline double recursion_residual(const MetricModel& model, const ChartPoint& p, const Vec3& u, int k,
                                 const SeriesGrid& grid, const OdeSettings& ode = {}) {
  require_cyclic_parallel(model, p);
  const RicciJet j = ricci_jet(model, p);
  require_unit(j.g, u, "recursion_residual");
  const double C = u.dot(j.ricci * u) - j.tau;
  const RadialProfile prof = radial_profile(model, p, u, grid, ode);
  return recursion_residual(theta_series(prof, kThetaSeriesOrder), tauS_theta_series(prof, kTauSThetaSeriesOrder),
                            C, k);
}

}  // namespace datri

#endif  // DATRI_SPHERE_HPP
