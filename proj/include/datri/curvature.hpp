#ifndef DATRI_CURVATURE_HPP
#define DATRI_CURVATURE_HPP

// Curvature hierarchy of a MetricModel at a chart point.
//
// Conventions (used everywhere in the library):
//   R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
//   R^l_{kij} : R(d_i, d_j) d_k = R^l_{kij} d_l
//   R_{ijkl}  = <R(d_i, d_j) d_k, d_l>         (fully covariant)
//   K(X,Y)    = R(X,Y,Y,X) / |X ^ Y|^2          (round sphere: K = +1)
//   rho_{jk}  = R^i_{kij},  tau = g^{jk} rho_{jk}
//   Jacobi equation: J'' + R(J, g')g' = 0

#include "datri/jet.hpp"
#include "datri/metric_model.hpp"
#include "datri/types.hpp"

#include <cmath>
#include <utility>

namespace datri {

constexpr int idx3(int a, int b, int c) { return a * 9 + b * 3 + c; }
constexpr int idx4(int a, int b, int c, int d) { return a * 27 + b * 9 + c * 3 + d; }

using Tensor3 = std::array<double, 27>;
using Tensor4 = std::array<double, 81>;

/// Value-level curvature at one point: Christoffel symbols, Riemann, Ricci, scalar.
struct CurvatureBundle {
  ChartPoint at;
  Mat3 g = Mat3::Identity();
  Mat3 ginv = Mat3::Identity();
  Tensor3 gamma{};    // gamma[idx3(k, i, j)] = Gamma^k_ij
  Tensor4 riemann{};  // riemann[idx4(i, j, k, l)] = R_ijkl
  Mat3 ricci = Mat3::Zero();
  double tau = 0.0;

  double inner(const Vec3& x, const Vec3& y) const { return x.dot(g * y); }
  double norm(const Vec3& x) const { return std::sqrt(inner(x, x)); }

  /// R(X,Y,Z,W) = <R(X,Y)Z, W>.
  double riemann_form(const Vec3& x, const Vec3& y, const Vec3& z, const Vec3& w) const {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double xy = x[i] * y[j];
        if (xy == 0.0) continue;
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) s += xy * z[k] * w[l] * riemann[idx4(i, j, k, l)];
      }
    return s;
  }

  double ricci_form(const Vec3& x, const Vec3& y) const { return x.dot(ricci * y); }

  /// Gamma(x, y)^k = Gamma^k_ij x^i y^j.
  Vec3 christoffel(const Vec3& x, const Vec3& y) const {
    Vec3 out = Vec3::Zero();
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[k] += gamma[idx3(k, i, j)] * x[i] * y[j];
    return out;
  }

  double riemann_norm_sq() const {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) {
            double raised = 0.0;
            for (int a = 0; a < 3; ++a)
              for (int b = 0; b < 3; ++b)
                for (int c = 0; c < 3; ++c)
                  for (int d = 0; d < 3; ++d)
                    raised += ginv(i, a) * ginv(j, b) * ginv(k, c) * ginv(l, d) *
                              riemann[idx4(a, b, c, d)];
            s += raised * riemann[idx4(i, j, k, l)];
          }
    return s;
  }

  double ricci_norm_sq() const {
    const Mat3 up = ginv * ricci * ginv;
    return (up.array() * ricci.array()).sum();
  }
};

namespace detail {

struct MetricDerivatives {
  Mat3 g;
  std::array<Mat3, 3> dg;                   // dg[m](i, j) = d_m g_ij
  std::array<std::array<Mat3, 3>, 3> ddg;   // ddg[m][n](i, j) = d_m d_n g_ij
};

inline MetricDerivatives metric_derivatives(const MetricModel& model, const Vec3& x) {
  const MetricJet<2> jet = model.metric_jet<2>(x);
  MetricDerivatives d;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Jet<2>& c = jet[i][j];
      d.g(i, j) = c.value();
      for (int m = 0; m < 3; ++m) {
        d.dg[m](i, j) = c[1 + m];
        for (int n = 0; n < 3; ++n) {
          int e[3] = {0, 0, 0};
          e[m] += 1;
          e[n] += 1;
          d.ddg[m][n](i, j) = c.derivative(e[0], e[1], e[2]);
        }
      }
    }
  return d;
}

}  // namespace detail

/// Curvature at p from the second-order metric jet.
inline CurvatureBundle curvature_at(const MetricModel& model, const ChartPoint& p) {
  const detail::MetricDerivatives d = detail::metric_derivatives(model, p.coords);
  CurvatureBundle b;
  b.at = p;
  b.g = d.g;
  Eigen::LLT<Mat3> llt(d.g);
  if (llt.info() != Eigen::Success)
    throw ModelError("metric of model '" + model.name() + "' is not positive definite");
  b.ginv = llt.solve(Mat3::Identity());
  b.ginv = 0.5 * (b.ginv + b.ginv.transpose()).eval();

  // lowered symbols G_lij = 1/2 (d_i g_lj + d_j g_li - d_l g_ij) and their derivatives
  Tensor3 low{};
  std::array<Tensor3, 3> dlow{};
  for (int l = 0; l < 3; ++l)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        low[idx3(l, i, j)] = 0.5 * (d.dg[i](l, j) + d.dg[j](l, i) - d.dg[l](i, j));
        for (int m = 0; m < 3; ++m)
          dlow[m][idx3(l, i, j)] =
              0.5 * (d.ddg[m][i](l, j) + d.ddg[m][j](l, i) - d.ddg[m][l](i, j));
      }
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int l = 0; l < 3; ++l) s += b.ginv(k, l) * low[idx3(l, i, j)];
        b.gamma[idx3(k, i, j)] = s;
      }
  // d_m Gamma^k_ij = g^kl (d_m G_lij - d_m g_la Gamma^a_ij)
  std::array<Tensor3, 3> dgamma{};
  for (int m = 0; m < 3; ++m)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double inner[3];
        for (int l = 0; l < 3; ++l) {
          double s = dlow[m][idx3(l, i, j)];
          for (int a = 0; a < 3; ++a) s -= d.dg[m](l, a) * b.gamma[idx3(a, i, j)];
          inner[l] = s;
        }
        for (int k = 0; k < 3; ++k)
          dgamma[m][idx3(k, i, j)] =
              b.ginv(k, 0) * inner[0] + b.ginv(k, 1) * inner[1] + b.ginv(k, 2) * inner[2];
      }
  // R^l_kij = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik
  Tensor4 up{};  // up[idx4(l, k, i, j)]
  for (int l = 0; l < 3; ++l)
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double s = dgamma[i][idx3(l, j, k)] - dgamma[j][idx3(l, i, k)];
          for (int m = 0; m < 3; ++m)
            s += b.gamma[idx3(l, i, m)] * b.gamma[idx3(m, j, k)] -
                 b.gamma[idx3(l, j, m)] * b.gamma[idx3(m, i, k)];
          up[idx4(l, k, i, j)] = s;
        }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double s = 0.0;
          for (int m = 0; m < 3; ++m) s += d.g(l, m) * up[idx4(m, k, i, j)];
          b.riemann[idx4(i, j, k, l)] = s;
        }
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) s += up[idx4(i, k, i, j)];
      b.ricci(j, k) = s;
    }
  b.ricci = 0.5 * (b.ricci + b.ricci.transpose()).eval();
  b.tau = (b.ginv.array() * b.ricci.array()).sum();
  return b;
}

/// Covariant derivatives of Ricci and scalar curvature up to second order,
/// computed by pushing a fourth-order metric jet through the whole hierarchy.
struct RicciJet {
  ChartPoint at;
  Mat3 g = Mat3::Identity();
  Mat3 ricci = Mat3::Zero();
  double tau = 0.0;
  Tensor3 nabla_ricci{};   // [idx3(m, j, k)] = nabla_m rho_jk
  Vec3 nabla_tau = Vec3::Zero();  // d_m tau
  Tensor4 nabla2_ricci{};  // [idx4(n, m, j, k)] = nabla_n nabla_m rho_jk
  Mat3 nabla2_tau = Mat3::Zero();  // (n, m) = nabla_n nabla_m tau
  Tensor4 riemann{};       // value-level R_ijkl from the same jet (cross-check route)

  double nabla_ricci_uuu(const Vec3& u) const {
    double s = 0.0;
    for (int m = 0; m < 3; ++m)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) s += u[m] * u[j] * u[k] * nabla_ricci[idx3(m, j, k)];
    return s;
  }
  double nabla_tau_u(const Vec3& u) const { return nabla_tau.dot(u); }
  double nabla2_tau_uu(const Vec3& u) const { return u.dot(nabla2_tau * u); }
  double nabla2_ricci_uu(const Vec3& u) const {
    double s = 0.0;
    for (int n = 0; n < 3; ++n)
      for (int m = 0; m < 3; ++m)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k)
            s += u[n] * u[m] * u[j] * u[k] * nabla2_ricci[idx4(n, m, j, k)];
    return s;
  }
  /// (div rho)_k = g^{ij} nabla_i rho_jk
  Vec3 div_ricci() const {
    const Mat3 ginv = g.inverse();
    Vec3 out = Vec3::Zero();
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[k] += ginv(i, j) * nabla_ricci[idx3(i, j, k)];
    return out;
  }
};

namespace detail {

template <int D>
Sym3<Jet<D>> inverse(const Sym3<Jet<D>>& a) {
  Sym3<Jet<D>> adj;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int i1 = (j + 1) % 3, i2 = (j + 2) % 3;
      const int j1 = (i + 1) % 3, j2 = (i + 2) % 3;
      adj[i][j] = a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1];
    }
  const Jet<D> det = a[0][0] * adj[0][0] + a[0][1] * adj[1][0] + a[0][2] * adj[2][0];
  const Jet<D> inv_det = reciprocal(det);
  for (auto& row : adj)
    for (auto& v : row) v = v * inv_det;
  return adj;
}

}  // namespace detail

inline RicciJet ricci_jet(const MetricModel& model, const ChartPoint& p) {
  using J = Jet<4>;
  const MetricJet<4> g = model.metric_jet<4>(p.coords);
  const auto ginv = detail::inverse(g);

  std::array<J, 27> gamma;
  {
    std::array<std::array<std::array<J, 3>, 3>, 3> dg;  // dg[m][i][j]
    for (int m = 0; m < 3; ++m)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) dg[m][i][j] = g[i][j].partial(m);
    std::array<J, 27> low;
    for (int l = 0; l < 3; ++l)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          low[idx3(l, i, j)] = 0.5 * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]);
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
          J s = ginv[k][0] * low[idx3(0, i, j)] + ginv[k][1] * low[idx3(1, i, j)] +
                ginv[k][2] * low[idx3(2, i, j)];
          gamma[idx3(k, i, j)] = s;
          gamma[idx3(k, j, i)] = s;
        }
  }
  std::array<std::array<J, 27>, 3> dgamma;
  for (int m = 0; m < 3; ++m)
    for (int n = 0; n < 27; ++n) dgamma[m][n] = gamma[n].partial(m);

  // R^i_kij contracted straight into Ricci; full R kept at value level only
  RicciJet out;
  out.at = p;
  std::array<J, 9> ricci;
  for (int j = 0; j < 3; ++j)
    for (int k = j; k < 3; ++k) {
      J s;
      for (int i = 0; i < 3; ++i) {
        s += dgamma[i][idx3(i, j, k)] - dgamma[j][idx3(i, i, k)];
        for (int m = 0; m < 3; ++m)
          s += gamma[idx3(i, i, m)] * gamma[idx3(m, j, k)] - gamma[idx3(i, j, m)] * gamma[idx3(m, i, k)];
      }
      ricci[j * 3 + k] = s;
      ricci[k * 3 + j] = s;
    }
  J tau;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) tau += ginv[j][k] * ricci[j * 3 + k];

  // nabla_m rho_jk = d_m rho_jk - Gamma^l_mj rho_lk - Gamma^l_mk rho_jl
  std::array<J, 27> nr;
  for (int m = 0; m < 3; ++m)
    for (int j = 0; j < 3; ++j)
      for (int k = j; k < 3; ++k) {
        J s = ricci[j * 3 + k].partial(m);
        for (int l = 0; l < 3; ++l)
          s -= gamma[idx3(l, m, j)] * ricci[l * 3 + k] + gamma[idx3(l, m, k)] * ricci[j * 3 + l];
        nr[idx3(m, j, k)] = s;
        nr[idx3(m, k, j)] = s;
      }
  // nabla_n nabla_m rho_jk: only the value is valid at this order
  for (int n = 0; n < 3; ++n)
    for (int m = 0; m < 3; ++m)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          double s = nr[idx3(m, j, k)].partial(n).value();
          for (int l = 0; l < 3; ++l)
            s -= gamma[idx3(l, n, m)].value() * nr[idx3(l, j, k)].value() +
                 gamma[idx3(l, n, j)].value() * nr[idx3(m, l, k)].value() +
                 gamma[idx3(l, n, k)].value() * nr[idx3(m, j, l)].value();
          out.nabla2_ricci[idx4(n, m, j, k)] = s;
        }
  std::array<J, 3> dtau;
  for (int m = 0; m < 3; ++m) dtau[m] = tau.partial(m);
  for (int n = 0; n < 3; ++n)
    for (int m = 0; m < 3; ++m) {
      double s = dtau[m].partial(n).value();
      for (int l = 0; l < 3; ++l) s -= gamma[idx3(l, n, m)].value() * dtau[l].value();
      out.nabla2_tau(n, m) = s;
    }

  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      out.g(i, j) = g[i][j].value();
      out.ricci(i, j) = ricci[i * 3 + j].value();
    }
  out.tau = tau.value();
  for (int n = 0; n < 27; ++n) out.nabla_ricci[n] = nr[n].value();
  for (int m = 0; m < 3; ++m) out.nabla_tau[m] = dtau[m].value();

  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double s = 0.0;
          for (int q = 0; q < 3; ++q) {
            double r = dgamma[i][idx3(q, j, k)].value() - dgamma[j][idx3(q, i, k)].value();
            for (int m = 0; m < 3; ++m)
              r += gamma[idx3(q, i, m)].value() * gamma[idx3(m, j, k)].value() -
                   gamma[idx3(q, j, m)].value() * gamma[idx3(m, i, k)].value();
            s += out.g(l, q) * r;
          }
          out.riemann[idx4(i, j, k, l)] = s;
        }
  return out;
}

inline constexpr double kUnitTolerance = 1e-12;

inline void require_unit(const Mat3& g, const Vec3& u, const char* what) {
  const double n2 = u.dot(g * u);
  if (!(std::abs(std::sqrt(n2) - 1.0) <= kUnitTolerance))
    throw DomainError(std::string(what) + ": direction is not unit length in the metric");
}

/// Sectional curvature of the plane spanned by x, y at p.
inline double sectional(const MetricModel& model, const ChartPoint& p, const Vec3& x, const Vec3& y) {
  const CurvatureBundle b = curvature_at(model, p);
  const double xx = b.inner(x, x), yy = b.inner(y, y), xy = b.inner(x, y);
  const double area2 = xx * yy - xy * xy;
  if (!(area2 > 1e-14 * xx * yy)) throw DomainError("sectional: vectors do not span a plane");
  return b.riemann_form(x, y, y, x) / area2;
}

/// nabla_u rho(u, u) for a unit u.
inline double nabla_ricci_uuu(const MetricModel& model, const ChartPoint& p, const Vec3& u) {
  const RicciJet j = ricci_jet(model, p);
  require_unit(j.g, u, "nabla_ricci_uuu");
  return j.nabla_ricci_uuu(u);
}

/// nabla_u rho(u,u) + c nabla_u tau. Vanishes identically iff the Ricci tensor is
/// cyclic parallel and tau is constant, for any c != -2/5.
inline double lemma_lin_residual(const MetricModel& model, const ChartPoint& p, const Vec3& u,
                                 double c) {
  if (std::abs(c + 0.4) < 1e-12) throw DomainError("lemma_lin_residual: c = -2/5 is excluded");
  const RicciJet j = ricci_jet(model, p);
  require_unit(j.g, u, "lemma_lin_residual");
  return j.nabla_ricci_uuu(u) + c * j.nabla_tau_u(u);
}

inline constexpr double kFiniteDifferenceStep = 1e-3;

/// (nabla^2_uu tau, nabla^2_uu rho(u,u)): second derivatives of tau and
/// rho(g', g') along the geodesic through (p, u) at t = 0.
inline std::pair<double, double> second_radial_derivatives(const MetricModel& model,
                                                           const ChartPoint& p, const Vec3& u) {
  const RicciJet j = ricci_jet(model, p);
  require_unit(j.g, u, "second_radial_derivatives");
  // the geodesic over |t| <= 2h stays within ~2h|u| of p in coordinates
  const double reach = 2.0 * kFiniteDifferenceStep * u.norm();
  for (int s : {-1, 1})
    for (int a = 0; a < 3; ++a) {
      Vec3 q = p.coords;
      q[a] += s * reach;
      model.require_in_chart(q);
    }
  return {j.nabla2_tau_uu(u), j.nabla2_ricci_uu(u)};
}

/// Orthonormal basis of (T_pM, g) obtained by Gram-Schmidt from `first`.
inline Mat3 orthonormal_frame(const Mat3& g, const Vec3& first) {
  Mat3 frame;
  Vec3 seeds[3] = {first, Vec3::UnitX(), Vec3::UnitY()};
  int filled = 0;
  for (int s = 0; s < 5 && filled < 3; ++s) {
    Vec3 v = s < 3 ? seeds[s] : (s == 3 ? Vec3::UnitZ() : Vec3(1, 1, 1));
    for (int k = 0; k < filled; ++k) v -= frame.col(k).dot(g * v) * frame.col(k);
    for (int k = 0; k < filled; ++k) v -= frame.col(k).dot(g * v) * frame.col(k);
    const double n = std::sqrt(v.dot(g * v));
    if (n < 1e-6) continue;
    frame.col(filled++) = v / n;
  }
  return frame;
}

/// Unit vector of (T_pM, g) with components `c` in the orthonormal frame built from the coordinate axes.
inline Vec3 from_orthonormal(const Mat3& g, const Vec3& c) {
  const Mat3 e = orthonormal_frame(g, Vec3::UnitX());
  return e * c;
}

}  // namespace datri

#endif  // DATRI_CURVATURE_HPP
