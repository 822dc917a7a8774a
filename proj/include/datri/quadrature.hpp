#ifndef DATRI_QUADRATURE_HPP
#define DATRI_QUADRATURE_HPP

#include "datri/types.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace datri {

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b], nodes ascending.
inline Rule1D gauss_legendre(int n, double a, double b) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  const auto zeros = boost::math::legendre_p_zeros<double>(n);  // non-negative half
  std::vector<double> x;
  for (double z : zeros) {
    x.push_back(z);
    if (z != 0.0) x.push_back(-z);
  }
  std::sort(x.begin(), x.end());
  Rule1D r;
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (double z : x) {
    const double dp = boost::math::legendre_p_prime(n, z);
    r.nodes.push_back(mid + half * z);
    r.weights.push_back(half * 2.0 / ((1.0 - z * z) * dp * dp));
  }
  return r;
}

/// Periodic trapezoid rule on [0, 2 pi).
inline Rule1D trapezoid_periodic(int n) {
  Rule1D r;
  for (int k = 0; k < n; ++k) {
    r.nodes.push_back(2.0 * kPi * k / n);
    r.weights.push_back(2.0 * kPi / n);
  }
  return r;
}

enum class RuleKind { full_sphere, hemisphere, tube_rectangle };

/// Directions on the unit sphere of R^3 (components in an orthonormal frame of T_pM).
struct QuadratureRule {
  RuleKind kind = RuleKind::full_sphere;
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  int polar_nodes = 0;
  int azimuth_nodes = 0;

  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
  /// Exact for spherical polynomials up to this degree.
  int exactness_degree() const { return std::min(2 * polar_nodes - 1, azimuth_nodes - 1); }
};

/// Rotation taking e_z to the unit vector `axis`.
inline Mat3 rotation_to(const Vec3& axis) {
  const Vec3 z = axis.normalized();
  const Vec3 helper = std::abs(z.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 x = (helper - helper.dot(z) * z).normalized();
  const Vec3 y = z.cross(x);
  Mat3 m;
  m.col(0) = x;
  m.col(1) = y;
  m.col(2) = z;
  return m;
}

namespace detail {

inline QuadratureRule polar_product(RuleKind kind, double z_lo, const Mat3& rot, int n_polar,
                                    int n_azimuth) {
  const Rule1D polar = gauss_legendre(n_polar, z_lo, 1.0);
  const Rule1D az = trapezoid_periodic(n_azimuth);
  QuadratureRule q;
  q.kind = kind;
  q.polar_nodes = n_polar;
  q.azimuth_nodes = n_azimuth;
  for (std::size_t i = 0; i < polar.nodes.size(); ++i) {
    const double z = polar.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (std::size_t k = 0; k < az.nodes.size(); ++k) {
      const double phi = az.nodes[k];
      q.nodes.push_back(rot * Vec3(s * std::cos(phi), s * std::sin(phi), z));
      q.weights.push_back(polar.weights[i] * az.weights[k]);
    }
  }
  return q;
}

}  // namespace detail

/// Gauss-Legendre in cos(polar) x periodic trapezoid in azimuth; weights sum to 4 pi.
inline QuadratureRule full_sphere_rule(int n_polar = 24, int n_azimuth = 48) {
  return detail::polar_product(RuleKind::full_sphere, -1.0, Mat3::Identity(), n_polar, n_azimuth);
}

/// Same construction on cos(polar) in [0, 1], pole rotated onto `axis`; weights sum to 2 pi.
inline QuadratureRule hemisphere_rule(const Vec3& axis, int n_polar = 24, int n_azimuth = 48) {
  return detail::polar_product(RuleKind::hemisphere, 0.0, rotation_to(axis), n_polar, n_azimuth);
}

/// Neumaier-compensated sum, accumulated in call order.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Evaluates f(0..n-1) on all hardware threads and returns the results in index
/// order. If any call throws, the exception of the lowest failing index is rethrown.
template <class F>
auto parallel_map(std::size_t n, F&& f) -> std::vector<decltype(f(std::size_t{0}))> {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out(n);
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n));
  auto run = [&](std::size_t w) {
    for (std::size_t i = w; i < n; i += workers) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Deterministic low-discrepancy directions on S^2 from a Halton(2, 3) sequence.
inline std::vector<Vec3> halton_directions(std::size_t count, unsigned seed = 0) {
  auto radical_inverse = [](unsigned long i, unsigned base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
      f /= base;
      r += f * static_cast<double>(i % base);
      i /= base;
    }
    return r;
  };
  std::vector<Vec3> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const unsigned long i = static_cast<unsigned long>(k) + 1 + 97ul * seed;
    const double z = 1.0 - 2.0 * radical_inverse(i, 2);
    const double phi = 2.0 * kPi * radical_inverse(i, 3);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    out.emplace_back(s * std::cos(phi), s * std::sin(phi), z);
  }
  return out;
}

}  // namespace datri

#endif  // DATRI_QUADRATURE_HPP
