#ifndef DATRI_SERIES_HPP
#define DATRI_SERIES_HPP

// Least-squares power/Laurent series fits in one real variable.

#include "datri/types.hpp"

#include <cmath>
#include <vector>

namespace datri {

/// Coefficients c_k of sum_k c_k r^k for k = k_min .. k_max.
struct SeriesFit {
  int k_min = 0;
  std::vector<double> coefficients;
  std::vector<double> uncertainties;
  double residual = 0.0;  // max |data - fit| over the grid
  double condition = 1.0;
  std::vector<double> radii;

  int k_max() const { return k_min + static_cast<int>(coefficients.size()) - 1; }
  double coeff(int k) const {
    if (k < k_min || k > k_max()) return 0.0;
    return coefficients[static_cast<std::size_t>(k - k_min)];
  }
  double uncertainty(int k) const {
    if (k < k_min || k > k_max()) return 0.0;
    return uncertainties[static_cast<std::size_t>(k - k_min)];
  }
};

/// Geometric grid of `count` points in [lo, hi].
inline std::vector<double> geometric_grid(double lo, double hi, int count) {
  if (!(lo > 0 && hi > lo && count >= 2)) throw DomainError("geometric_grid: need 0 < lo < hi, count >= 2");
  std::vector<double> g;
  for (int i = 0; i < count; ++i) g.push_back(lo * std::pow(hi / lo, double(i) / (count - 1)));
  return g;
}

struct PowerFit {
  std::vector<double> coefficients;  // aligned with the requested powers
  std::vector<double> uncertainties;
  double residual = 0.0;
  double condition = 1.0;
};

inline constexpr double kMaxFitCondition = 1e11;

/// Least squares for y(x) ~ sum_j c_j x^{powers[j]}. Columns are scaled by
/// x_max^p so the conditioning reflects the shape of the basis, not its units.
inline PowerFit fit_powers(const std::vector<double>& x, const std::vector<double>& y,
                           const std::vector<int>& powers) {
  const int m = static_cast<int>(x.size());
  const int n = static_cast<int>(powers.size());
  if (m < n || n == 0) throw FitError("power fit: fewer samples than coefficients");
  double xmax = 0.0;
  for (double v : x) xmax = std::max(xmax, std::abs(v));
  Eigen::MatrixXd a(m, n);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    b[i] = y[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) a(i, j) = std::pow(x[static_cast<std::size_t>(i)] / xmax, powers[static_cast<std::size_t>(j)]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  PowerFit out;
  out.condition = sv[0] / sv[n - 1];
  if (!(out.condition < kMaxFitCondition)) throw FitError("power fit: ill-conditioned design (grid too narrow)");
  const Eigen::VectorXd c = svd.solve(b);
  const Eigen::VectorXd res = a * c - b;
  out.residual = res.cwiseAbs().maxCoeff();
  const double dof = std::max(1, m - n);
  const double sigma2 = res.squaredNorm() / dof;
  // cov = sigma^2 V S^-2 V^T
  const Eigen::MatrixXd vs = svd.matrixV() * sv.cwiseInverse().asDiagonal();
  for (int j = 0; j < n; ++j) {
    const double scale = std::pow(xmax, powers[static_cast<std::size_t>(j)]);
    out.coefficients.push_back(c[j] / scale);
    out.uncertainties.push_back(std::sqrt(sigma2 * vs.row(j).squaredNorm()) / scale);
  }
  return out;
}

/// Fits f(r) = sum_{k=k_min}^{k_max} c_k r^k from samples of f(r) and f(-r)
/// (the function continued to the opposite direction). Even and odd parts are
/// fitted separately; the series is fitted to r^{-k_min} f so only
/// non-negative powers enter the design.
inline SeriesFit fit_even_odd(const std::vector<double>& radii, const std::vector<double>& f_plus,
                              const std::vector<double>& f_minus, int k_min, int k_max) {
  const int shift = -k_min;
  std::vector<double> even, odd;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double w = std::pow(radii[i], shift);
    even.push_back(0.5 * (f_plus[i] + f_minus[i]) * w);
    odd.push_back(0.5 * (f_plus[i] - f_minus[i]) * w);
  }
  std::vector<int> even_powers, odd_powers;
  for (int k = k_min; k <= k_max; ++k) {
    const int p = k + shift;
    ((k % 2 == 0) ? even_powers : odd_powers).push_back(p);
  }
  SeriesFit fit;
  fit.k_min = k_min;
  fit.radii = radii;
  fit.coefficients.assign(static_cast<std::size_t>(k_max - k_min + 1), 0.0);
  fit.uncertainties.assign(fit.coefficients.size(), 0.0);
  for (int parity = 0; parity < 2; ++parity) {
    const auto& powers = parity == 0 ? even_powers : odd_powers;
    if (powers.empty()) continue;
    const PowerFit pf = fit_powers(radii, parity == 0 ? even : odd, powers);
    for (std::size_t j = 0; j < powers.size(); ++j) {
      const auto slot = static_cast<std::size_t>(powers[j]);
      fit.coefficients[slot] = pf.coefficients[j];
      fit.uncertainties[slot] = pf.uncertainties[j];
    }
    fit.residual = std::max(fit.residual, pf.residual);
    fit.condition = std::max(fit.condition, pf.condition);
  }
  return fit;
}

}  // namespace datri

#endif  // DATRI_SERIES_HPP
