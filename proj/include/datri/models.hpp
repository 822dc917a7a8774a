#ifndef DATRI_MODELS_HPP
#define DATRI_MODELS_HPP

// Closed-form model metrics. Each is written once as a template over the scalar
// type so the same expression feeds doubles and Taylor jets.

#include "datri/metric_model.hpp"

#include <cmath>

namespace datri::models {

using std::cos;
using std::exp;
using std::sin;

template <class T>
Sym3<T> diagonal(const T& a, const T& b, const T& c) {
  Sym3<T> g{};
  g[0][0] = a;
  g[1][1] = b;
  g[2][2] = c;
  return g;
}

class Euclidean final : public ClosedFormMetric<Euclidean> {
 public:
  Euclidean() : ClosedFormMetric("euclidean", {}, Box{Vec3::Constant(-10), Vec3::Constant(10)}) {}

  template <class T>
  Sym3<T> components(const std::array<T, 3>&) const {
    return diagonal(T(1.0), T(1.0), T(1.0));
  }
};

/// Space form of curvature kappa in the conformal (stereographic / Poincare) chart
/// g = 4 / (1 + kappa |x|^2)^2 * delta.
class ConformalSpaceForm final : public ClosedFormMetric<ConformalSpaceForm> {
 public:
  ConformalSpaceForm(std::string name, double kappa)
      : ClosedFormMetric(std::move(name), {{"kappa", kappa}}, domain_for(kappa)), kappa_(kappa) {}

  template <class T>
  Sym3<T> components(const std::array<T, 3>& x) const {
    const T s = 1.0 + kappa_ * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const T f = 4.0 / (s * s);
    return diagonal(f, f, f);
  }

  static Box domain_for(double kappa) {
    if (kappa == 0.0) return Box{Vec3::Constant(-10), Vec3::Constant(10)};
    // for kappa < 0 the box corners stay inside the ball |x| < 1/sqrt(-kappa)
    const double h = kappa > 0 ? 2.0 / std::sqrt(kappa) : 0.55 / std::sqrt(-kappa);
    return Box{Vec3::Constant(-h), Vec3::Constant(h)};
  }

 private:
  double kappa_;
};

/// Riemannian product of the unit 2-sphere (stereographic chart in x, y) with the line.
class ProductS2xR final : public ClosedFormMetric<ProductS2xR> {
 public:
  ProductS2xR()
      : ClosedFormMetric("product_s2xr", {}, Box{Vec3(-2, -2, -10), Vec3(2, 2, 10)}) {}

  template <class T>
  Sym3<T> components(const std::array<T, 3>& x) const {
    const T s = 1.0 + x[0] * x[0] + x[1] * x[1];
    const T f = 4.0 / (s * s);
    return diagonal(f, f, T(1.0));
  }
};

/// Berger sphere: unit S^3 with the Hopf fibres scaled by lambda. Euler-angle chart
/// shifted so the equator theta = pi/2 sits at x = 0:
///   g = 1/4 [dx^2 + cos^2 x dy^2 + lambda^2 (dz - sin x dy)^2].
class BergerSphere final : public ClosedFormMetric<BergerSphere> {
 public:
  explicit BergerSphere(double lambda)
      : ClosedFormMetric("berger_sphere", {{"lambda", lambda}},
                         Box{Vec3(-1.3, -4, -4), Vec3(1.3, 4, 4)}),
        l2_(lambda * lambda) {}

  template <class T>
  Sym3<T> components(const std::array<T, 3>& x) const {
    const T s = sin(x[0]);
    const T c = cos(x[0]);
    Sym3<T> g{};
    g[0][0] = T(0.25);
    g[1][1] = 0.25 * (c * c + l2_ * s * s);
    g[2][2] = T(0.25 * l2_);
    g[1][2] = g[2][1] = -0.25 * l2_ * s;
    return g;
  }

 private:
  double l2_;
};

/// Heisenberg group, g = dx^2 + dy^2 + (dz - x dy)^2.
class Heisenberg final : public ClosedFormMetric<Heisenberg> {
 public:
  Heisenberg() : ClosedFormMetric("heisenberg", {}, Box{Vec3::Constant(-3), Vec3::Constant(3)}) {}

  template <class T>
  Sym3<T> components(const std::array<T, 3>& x) const {
    Sym3<T> g{};
    g[0][0] = T(1.0);
    g[1][1] = 1.0 + x[0] * x[0];
    g[2][2] = T(1.0);
    g[1][2] = g[2][1] = -x[0];
    return g;
  }
};

/// Conformally flat perturbation e^{2f} delta with
///   f = eps * x * y + cubic * x^2 * y.
class PerturbedConformal final : public ClosedFormMetric<PerturbedConformal> {
 public:
  PerturbedConformal(double eps, double cubic)
      : ClosedFormMetric("perturbed_conformal", {{"eps", eps}, {"cubic", cubic}},
                         Box{Vec3::Constant(-3), Vec3::Constant(3)}),
        eps_(eps),
        cubic_(cubic) {}

  template <class T>
  Sym3<T> components(const std::array<T, 3>& x) const {
    const T f = eps_ * x[0] * x[1] + cubic_ * x[0] * x[0] * x[1];
    const T e = exp(2.0 * f);
    return diagonal(e, e, e);
  }

 private:
  double eps_;
  double cubic_;
};

}  // namespace datri::models

#endif  // DATRI_MODELS_HPP
