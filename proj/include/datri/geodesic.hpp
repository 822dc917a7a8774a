#ifndef DATRI_GEODESIC_HPP
#define DATRI_GEODESIC_HPP

// Geodesics, parallel frames and Jacobi fields: the exponential map, the volume
// density theta(v) and the shape operators of geodesic spheres.

#include "datri/curvature.hpp"
#include "datri/ode.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <complex>
#include <memory>
#include <vector>

namespace datri {

namespace detail {

inline Vec3 seg(const double* p) { return Vec3(p[0], p[1], p[2]); }
inline void put(double* p, const Vec3& v) {
  p[0] = v[0];
  p[1] = v[1];
  p[2] = v[2];
}

}  // namespace detail

/// Geodesic with checkpointed integration; state_at(t) re-integrates from the
/// nearest checkpoint so every sample carries full ODE accuracy.
class GeodesicPath {
 public:
  struct Sample {
    Vec3 position;
    Vec3 velocity;
  };

  GeodesicPath(const MetricModel& model, const TangentVector& initial, double t_max,
               OdeSettings settings = {})
      : model_(&model), initial_(initial), t_max_(t_max), settings_(settings) {
    if (t_max < 0) throw DomainError("GeodesicPath: t_max must be non-negative");
    OdeState<6> x = pack(initial.base.coords, initial.components);
    checkpoints_.push_back({0.0, x});
    integrate_to<6>(rhs(), x, 0.0, t_max, settings_,
                    [this](const OdeState<6>& s, double t) {
                      if (t > checkpoints_.back().first) checkpoints_.push_back({t, s});
                    });
    if (checkpoints_.back().first < t_max) checkpoints_.push_back({t_max, x});
  }

  double t_max() const { return t_max_; }
  const TangentVector& initial() const { return initial_; }

  Sample state_at(double t) const {
    if (t < 0 || t > t_max_ * (1 + 1e-14)) throw DomainError("GeodesicPath: parameter out of range");
    auto it = std::upper_bound(checkpoints_.begin(), checkpoints_.end(), t,
                               [](double v, const auto& c) { return v < c.first; });
    --it;
    OdeState<6> x = it->second;
    integrate_to<6>(rhs(), x, it->first, t, settings_);
    return {detail::seg(x.data()), detail::seg(x.data() + 3)};
  }

  std::size_t steps() const { return checkpoints_.size() - 1; }

 private:
  static OdeState<6> pack(const Vec3& x, const Vec3& v) {
    OdeState<6> s{};
    detail::put(s.data(), x);
    detail::put(s.data() + 3, v);
    return s;
  }

  struct Rhs {
    const MetricModel* model;
    void operator()(const OdeState<6>& s, OdeState<6>& ds, double) const {
      const Vec3 x = detail::seg(s.data());
      const Vec3 v = detail::seg(s.data() + 3);
      const CurvatureBundle b = curvature_at(*model, ChartPoint(x));
      detail::put(ds.data(), v);
      detail::put(ds.data() + 3, -b.christoffel(v, v));
    }
  };
  Rhs rhs() const { return Rhs{model_}; }

  const MetricModel* model_;
  TangentVector initial_;
  double t_max_;
  OdeSettings settings_;
  std::vector<std::pair<double, OdeState<6>>> checkpoints_;
};

/// exp_p(v): endpoint of the geodesic with initial velocity v at parameter 1.
inline ChartPoint exp_map(const MetricModel& model, const TangentVector& v, OdeSettings settings = {}) {
  model.require_in_chart(v.base.coords);
  if (v.components.isZero(0.0)) return v.base;
  GeodesicPath path(model, v, 1.0, settings);
  return ChartPoint(path.state_at(1.0).position);
}

/// Jacobi data along the unit-speed geodesic t -> exp_p(t u), 0 <= t <= r.
///
/// A is the 2x2 matrix of two normal Jacobi fields written in a parallel
/// orthonormal frame (E2, E3) of u-perp; A' its covariant derivative. For the
/// geodesic-sphere problem A(0) = 0, A'(0) = I.
struct JacobiTransport {
  double r = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();  // e1 = gamma'(r)
  Vec3 e2 = Vec3::Zero();
  Vec3 e3 = Vec3::Zero();
  Mat2 A = Mat2::Identity();
  Mat2 Aprime = Mat2::Identity();
  Mat2 radial_curvature = Mat2::Zero();  // R_rad(a,b) = <R(E_a, g')g', E_b> at r
  double tau_end = 0.0;                  // ambient scalar curvature at the endpoint
  double tangent_sectional = 0.0;        // K(span(E2, E3)) at the endpoint

  Mat2 Asecond() const { return -radial_curvature * A; }
  Mat3 frame() const {
    Mat3 f;
    f.col(0) = velocity;
    f.col(1) = e2;
    f.col(2) = e3;
    return f;
  }
};

struct JacobiInitial {
  Vec3 e2 = Vec3::Zero();
  Vec3 e3 = Vec3::Zero();
  Mat2 A = Mat2::Zero();
  Mat2 Aprime = Mat2::Identity();
};

namespace detail {

using JacobiState = OdeState<20>;

inline Mat2 radial_curvature(const CurvatureBundle& b, const Vec3& v, const Vec3& e2, const Vec3& e3) {
  Mat2 k;
  k(0, 0) = b.riemann_form(e2, v, v, e2);
  k(1, 1) = b.riemann_form(e3, v, v, e3);
  k(0, 1) = k(1, 0) = b.riemann_form(e2, v, v, e3);
  return k;
}

inline Mat2 mat2(const double* p) {
  Mat2 m;
  m << p[0], p[2], p[1], p[3];  // column-major storage
  return m;
}
inline void put2(double* p, const Mat2& m) {
  p[0] = m(0, 0);
  p[1] = m(1, 0);
  p[2] = m(0, 1);
  p[3] = m(1, 1);
}

inline auto jacobi_rhs(const MetricModel& model) {
  return [m = &model](const JacobiState& s, JacobiState& ds, double) {
    const Vec3 x = seg(s.data());
    const Vec3 v = seg(s.data() + 3);
    const Vec3 e2 = seg(s.data() + 6);
    const Vec3 e3 = seg(s.data() + 9);
    const CurvatureBundle b = curvature_at(*m, ChartPoint(x));
    put(ds.data(), v);
    put(ds.data() + 3, -b.christoffel(v, v));
    put(ds.data() + 6, -b.christoffel(v, e2));
    put(ds.data() + 9, -b.christoffel(v, e3));
    const Mat2 k = radial_curvature(b, v, e2, e3);
    for (int i = 0; i < 4; ++i) ds[12 + i] = s[16 + i];
    put2(ds.data() + 16, -k * mat2(s.data() + 12));
  };
}

/// Detects singular A between accepted steps, including double zeros where det A keeps its sign.
///
/// The unitary U = (A' - iA)^{-1} (A' + iA) has eigenvalues exp(2i alpha_k); A is singular exactly
/// when some 2 alpha_k is a multiple of 2 pi, and those crossings always go upward.
class ConjugateMonitor {
 public:
  bool crossed(const Mat2& a, const Mat2& ap) {
    using C2 = Eigen::Matrix2cd;
    const std::complex<double> i(0.0, 1.0);
    const C2 minus = ap.cast<std::complex<double>>() - i * a.cast<std::complex<double>>();
    const C2 plus = ap.cast<std::complex<double>>() + i * a.cast<std::complex<double>>();
    const Eigen::Vector2cd mu = Eigen::ComplexEigenSolver<C2>(minus.inverse() * plus, false).eigenvalues();
    const std::array<double, 2> now = {std::arg(mu[0]), std::arg(mu[1])};
    bool hit = false;
    // A may be singular at the start; comparisons begin after the first step
    if (calls_++ >= 2) {
      // pair old and new phases by the smaller total circular displacement
      const bool swap = dist(prev_[0], now[1]) + dist(prev_[1], now[0]) < dist(prev_[0], now[0]) + dist(prev_[1], now[1]);
      for (int k = 0; k < 2; ++k) {
        const double before = prev_[k], after = now[swap ? 1 - k : k];
        hit = hit || (before < 0.0 && before > -kPi / 2 && after >= 0.0 && after < kPi / 2);
      }
    }
    prev_ = now;
    return hit;
  }

 private:
  static double dist(double x, double y) {
    const double d = std::abs(x - y);
    return std::min(d, 2 * kPi - d);
  }
  std::array<double, 2> prev_{};
  int calls_ = 0;
};

}  // namespace detail

/// Integrates geodesic, parallel frame and Jacobi matrix jointly from (p, u) to radius r.
/// Throws ConjugatePointError as soon as A becomes singular at a positive parameter.
inline JacobiTransport jacobi_transport(const MetricModel& model, const ChartPoint& p, const Vec3& u,
                                        double r, const JacobiInitial& init,
                                        const OdeSettings& settings = {}) {
  using detail::put;
  using detail::seg;
  detail::JacobiState s{};
  put(s.data(), p.coords);
  put(s.data() + 3, u);
  put(s.data() + 6, init.e2);
  put(s.data() + 9, init.e3);
  detail::put2(s.data() + 12, init.A);
  detail::put2(s.data() + 16, init.Aprime);
  detail::ConjugateMonitor monitor;
  integrate_to<20>(detail::jacobi_rhs(model), s, 0.0, r, settings,
                   [&monitor](const detail::JacobiState& st, double t) {
                     const Mat2 a = detail::mat2(st.data() + 12);
                     if (t > 0 && a.determinant() <= 0.0)
                       throw ConjugatePointError("det A <= 0 along the radial geodesic");
                     if (monitor.crossed(a, detail::mat2(st.data() + 16)))
                       throw ConjugatePointError("A became singular along the radial geodesic");
                   });
  JacobiTransport out;
  out.r = r;
  out.position = seg(s.data());
  out.velocity = seg(s.data() + 3);
  out.e2 = seg(s.data() + 6);
  out.e3 = seg(s.data() + 9);
  out.A = detail::mat2(s.data() + 12);
  out.Aprime = detail::mat2(s.data() + 16);
  const CurvatureBundle end = curvature_at(model, ChartPoint(out.position));
  out.radial_curvature = detail::radial_curvature(end, out.velocity, out.e2, out.e3);
  out.tau_end = end.tau;
  out.tangent_sectional = end.riemann_form(out.e2, out.e3, out.e3, out.e2);
  return out;
}

/// Normal Jacobi fields with A(0) = 0, A'(0) = I along exp_p(t u), u unit.
inline JacobiTransport jacobi_along(const MetricModel& model, const ChartPoint& p, const Vec3& u,
                                    double r, const OdeSettings& settings = {}) {
  if (!(r > 0)) throw DomainError("jacobi_along: radius must be positive");
  const Mat3 g = model.metric(p.coords);
  require_unit(g, u, "jacobi_along");
  const Mat3 frame = orthonormal_frame(g, u);
  JacobiInitial init;
  init.e2 = frame.col(1);
  init.e3 = frame.col(2);
  return jacobi_transport(model, p, u, r, init, settings);
}

/// theta(v) = det A(|v|) / |v|^2. The ratio is formed as det(A / r), which is
/// regular as r -> 0 because A is integrated from A(0) = 0, A'(0) = I.
inline double volume_density(const JacobiTransport& j) {
  const Mat2 b = j.A / j.r;
  return b.determinant();
}

inline double volume_density(const MetricModel& model, const TangentVector& v,
                             const OdeSettings& settings = {}) {
  const Mat3 g = model.metric(v.base.coords);
  const double r = std::sqrt(v.components.dot(g * v.components));
  if (r == 0.0) return 1.0;
  return volume_density(jacobi_along(model, v.base, v.components / r, r, settings));
}

/// Shape operator S = A' A^{-1} of the geodesic sphere of radius j.r, w.r.t. the outward normal.
inline Mat2 sphere_shape_operator(const JacobiTransport& j) {
  const double det = j.A.determinant();
  if (!(std::abs(det) > 1e-300)) throw ConjugatePointError("shape operator: A is singular");
  return j.Aprime * j.A.inverse();
}

inline Mat2 sphere_shape_operator(const MetricModel& model, const ChartPoint& p, const Vec3& u,
                                  double r, const OdeSettings& settings = {}) {
  return sphere_shape_operator(jacobi_along(model, p, u, r, settings));
}

// ---------------------------------------------------------------------------
// Curves and frames along them

/// Smooth regular curve s -> c(s), s in [a, b], described by its first-order
/// system: (dx/ds, dv/ds) given (s, x, v). Geodesics use the geodesic equation;
/// prescribed curves ignore x and v.
class RegularCurve {
 public:
  virtual ~RegularCurve() = default;
  virtual double a() const = 0;
  virtual double b() const = 0;
  virtual Vec3 start_position() const = 0;
  virtual Vec3 start_velocity() const = 0;
  /// Coordinate acceleration d^2c/ds^2 at (s, x, v).
  virtual Vec3 acceleration(double s, const Vec3& x, const Vec3& v, const CurvatureBundle& b) const = 0;
  virtual bool is_geodesic() const { return false; }
  virtual bool is_closed() const { return false; }
};

class GeodesicCurve final : public RegularCurve {
 public:
  GeodesicCurve(const ChartPoint& p, const Vec3& velocity, double length)
      : p_(p.coords), v_(velocity), length_(length) {}
  double a() const override { return 0.0; }
  double b() const override { return length_; }
  Vec3 start_position() const override { return p_; }
  Vec3 start_velocity() const override { return v_; }
  Vec3 acceleration(double, const Vec3&, const Vec3& v, const CurvatureBundle& b) const override {
    return -b.christoffel(v, v);
  }
  bool is_geodesic() const override { return true; }

 private:
  Vec3 p_, v_;
  double length_;
};

/// Coordinate circle c(s) = center + R (cos s e1 + sin s e2), s in [a, b].
class ChartCircle final : public RegularCurve {
 public:
  ChartCircle(const Vec3& center, const Vec3& e1, const Vec3& e2, double radius, double a = 0.0,
              double b = 2 * kPi)
      : c_(center), e1_(e1), e2_(e2), R_(radius), a_(a), b_(b) {}
  double a() const override { return a_; }
  double b() const override { return b_; }
  Vec3 position(double s) const { return c_ + R_ * (std::cos(s) * e1_ + std::sin(s) * e2_); }
  Vec3 velocity(double s) const { return R_ * (-std::sin(s) * e1_ + std::cos(s) * e2_); }
  Vec3 start_position() const override { return position(a_); }
  Vec3 start_velocity() const override { return velocity(a_); }
  Vec3 acceleration(double s, const Vec3&, const Vec3&, const CurvatureBundle&) const override {
    return -R_ * (std::cos(s) * e1_ + std::sin(s) * e2_);
  }
  bool is_closed() const override { return std::abs(b_ - a_ - 2 * kPi) < 1e-14; }

 private:
  Vec3 c_, e1_, e2_;
  double R_, a_, b_;
};

/// Position, velocity and transported frame at one curve parameter.
struct CurveFrame {
  double s = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 covariant_acceleration = Vec3::Zero();  // D_s c'
  std::array<Vec3, 3> frame{};
};

enum class FrameTransport {
  parallel,       // D_s E = 0
  normal_bundle,  // D_s N = -<N, D_s T> T with T = c'/|c'|; keeps N perpendicular to c'
};

/// Transports `seed` along the curve and samples it at the increasing parameters `params`.
inline std::vector<CurveFrame> frames_along(const MetricModel& model, const RegularCurve& curve,
                                            const std::array<Vec3, 3>& seed,
                                            const std::vector<double>& params, FrameTransport mode,
                                            const OdeSettings& settings = {}) {
  using detail::put;
  using detail::seg;
  using State = OdeState<15>;
  auto deriv = [&](const State& st, State& ds, double s) {
    const Vec3 x = seg(st.data());
    const Vec3 v = seg(st.data() + 3);
    const CurvatureBundle b = curvature_at(model, ChartPoint(x));
    const Vec3 acc = curve.acceleration(s, x, v, b);
    put(ds.data(), v);
    put(ds.data() + 3, acc);
    const double speed = b.norm(v);
    const Vec3 t_hat = v / speed;
    // D_s T for T = v/|v|; only its component along N matters and N is perpendicular to v
    const Vec3 dT = (acc + b.christoffel(v, v)) / speed;
    for (int k = 0; k < 3; ++k) {
      const Vec3 e = seg(st.data() + 6 + 3 * k);
      Vec3 de = -b.christoffel(v, e);
      if (mode == FrameTransport::normal_bundle) de -= b.inner(e, dT) * t_hat;
      put(ds.data() + 6 + 3 * k, de);
    }
  };
  State st{};
  put(st.data(), curve.start_position());
  put(st.data() + 3, curve.start_velocity());
  for (int k = 0; k < 3; ++k) put(st.data() + 6 + 3 * k, seed[k]);

  std::vector<double> times;
  times.push_back(curve.a());
  for (double s : params) {
    if (s < times.back()) throw DomainError("frames_along: parameters must be increasing and >= a");
    times.push_back(s);
  }
  const auto states = integrate_at<15>(deriv, st, times, settings);
  std::vector<CurveFrame> out;
  out.reserve(params.size());
  for (std::size_t i = 1; i < states.size(); ++i) {
    const State& x = states[i];
    CurveFrame f;
    f.s = times[i];
    f.position = seg(x.data());
    f.velocity = seg(x.data() + 3);
    const CurvatureBundle b = curvature_at(model, ChartPoint(f.position));
    f.covariant_acceleration =
        curve.acceleration(f.s, f.position, f.velocity, b) + b.christoffel(f.velocity, f.velocity);
    for (int k = 0; k < 3; ++k) f.frame[k] = seg(x.data() + 6 + 3 * k);
    // only the normal vectors follow the normal-bundle law; slot 0 is the unit tangent
    if (mode == FrameTransport::normal_bundle) f.frame[0] = f.velocity / b.norm(f.velocity);
    out.push_back(f);
  }
  return out;
}

/// Parallel transport of an orthonormal seed frame along a geodesic path.
inline std::vector<CurveFrame> parallel_frame(const MetricModel& model, const GeodesicPath& path,
                                              const std::array<Vec3, 3>& seed,
                                              const std::vector<double>& params,
                                              const OdeSettings& settings = {}) {
  const GeodesicCurve curve(path.initial().base, path.initial().components, path.t_max());
  return frames_along(model, curve, seed, params, FrameTransport::parallel, settings);
}

}  // namespace datri

#endif  // DATRI_GEODESIC_HPP
