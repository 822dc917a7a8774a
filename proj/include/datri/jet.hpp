#ifndef DATRI_JET_HPP
#define DATRI_JET_HPP

// Truncated multivariate Taylor polynomials in three variables.
//
// A Jet<D> stores the Taylor coefficients c_a = (d^a f)(p) / a! of a smooth
// function around a base point p for every multi-index a with |a| <= D.
// Arithmetic is exact up to total degree D, so evaluating a closed-form
// expression on seeded jets yields all partial derivatives up to order D
// without step sizes.
//
// partial() lowers the degree of validity by one: after k partial
// derivatives only the coefficients of degree <= D - k are meaningful.
// Callers track this; the top coefficients are simply zero-filled.

#include <array>
#include <cmath>
#include <cstddef>

namespace datri {

namespace jet_detail {

constexpr int num_monomials(int degree) {
  return (degree + 1) * (degree + 2) * (degree + 3) / 6;
}

template <int D>
struct Tables {
  static constexpr int N = num_monomials(D);
  struct Exp {
    int e[3];
    int deg;
  };
  std::array<Exp, N> exps{};
  // index[a][b][c] of the monomial x^a y^b z^c, -1 if |.| > D
  std::array<std::array<std::array<int, D + 2>, D + 2>, D + 2> index{};
  // partial[i][k]: monomial whose x_i-derivative lands on k (k + e_i), -1 if out of range
  std::array<std::array<int, N>, 3> raise{};
  struct Pair {
    int a, b, out;
  };
  static constexpr int count_pairs() {
    int n = 0;
    for (int da = 0; da <= D; ++da)
      for (int db = 0; da + db <= D; ++db)
        n += ((da + 1) * (da + 2) / 2) * ((db + 1) * (db + 2) / 2);
    return n;
  }
  std::array<Pair, count_pairs()> pairs{};

  constexpr Tables() {
    for (auto& plane : index)
      for (auto& row : plane)
        for (auto& v : row) v = -1;
    int k = 0;
    for (int d = 0; d <= D; ++d)
      for (int a = d; a >= 0; --a)
        for (int b = d - a; b >= 0; --b) {
          const int c = d - a - b;
          exps[k] = Exp{{a, b, c}, d};
          index[a][b][c] = k;
          ++k;
        }
    for (int i = 0; i < 3; ++i)
      for (int m = 0; m < N; ++m) {
        int e[3] = {exps[m].e[0], exps[m].e[1], exps[m].e[2]};
        e[i] += 1;
        raise[i][m] = (exps[m].deg + 1 <= D) ? index[e[0]][e[1]][e[2]] : -1;
      }
    int p = 0;
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) {
        if (exps[a].deg + exps[b].deg > D) continue;
        pairs[p++] = Pair{a, b,
                          index[exps[a].e[0] + exps[b].e[0]][exps[a].e[1] + exps[b].e[1]]
                               [exps[a].e[2] + exps[b].e[2]]};
      }
  }
};

template <int D>
inline constexpr Tables<D> tables{};

}  // namespace jet_detail

template <int D>
class Jet {
 public:
  static constexpr int degree = D;
  static constexpr int size = jet_detail::num_monomials(D);

  constexpr Jet() : c_{} {}
  constexpr Jet(double value) : c_{} { c_[0] = value; }  // NOLINT(implicit)

  /// Coordinate function x_i expanded about base value x0.
  static Jet variable(int i, double x0) {
    Jet j(x0);
    if constexpr (D >= 1) j.c_[1 + i] = 1.0;
    return j;
  }

  double value() const { return c_[0]; }
  double& operator[](int k) { return c_[k]; }
  double operator[](int k) const { return c_[k]; }

  /// Taylor coefficient of x^a y^b z^c.
  double coeff(int a, int b, int c) const {
    const int k = jet_detail::tables<D>.index[a][b][c];
    return k < 0 ? 0.0 : c_[k];
  }

  /// Plain partial derivative d/dx_i d/dx_j ... evaluated at the base point.
  double derivative(int a, int b, int c) const {
    double f = 1.0;
    for (int n = 2; n <= a; ++n) f *= n;
    for (int n = 2; n <= b; ++n) f *= n;
    for (int n = 2; n <= c; ++n) f *= n;
    return coeff(a, b, c) * f;
  }

  Jet partial(int i) const {
    const auto& t = jet_detail::tables<D>;
    Jet out;
    for (int m = 0; m < size; ++m) {
      const int src = t.raise[i][m];
      if (src >= 0) out.c_[m] = (t.exps[m].e[i] + 1) * c_[src];
    }
    return out;
  }

  Jet& operator+=(const Jet& o) {
    for (int k = 0; k < size; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int k = 0; k < size; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Jet& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) {
    for (auto& v : a.c_) v = -v;
    return a;
  }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, double s) {
    a.c_[0] += s;
    return a;
  }
  friend Jet operator+(double s, Jet a) { return a + s; }
  friend Jet operator-(Jet a, double s) {
    a.c_[0] -= s;
    return a;
  }
  friend Jet operator-(double s, const Jet& a) { return -a + s; }
  friend Jet operator/(Jet a, double s) { return a *= (1.0 / s); }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet out;
    for (const auto& p : jet_detail::tables<D>.pairs) out.c_[p.out] += a.c_[p.a] * b.c_[p.b];
    return out;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
  friend Jet operator/(double s, const Jet& b) { return s * reciprocal(b); }

  /// f(a) for a scalar function given its Taylor coefficients f^(k)(a0)/k! at a0 = a.value().
  friend Jet compose(const Jet& a, const std::array<double, D + 1>& taylor) {
    Jet h = a;
    h.c_[0] = 0.0;
    Jet out(taylor[0]);
    Jet power(1.0);
    for (int k = 1; k <= D; ++k) {
      power = power * h;
      out += taylor[k] * power;
    }
    return out;
  }

  friend Jet reciprocal(const Jet& a) {
    const double x = a.value();
    std::array<double, D + 1> t{};
    double v = 1.0 / x;
    for (int k = 0; k <= D; ++k) {
      t[k] = v;
      v *= -1.0 / x;
    }
    return compose(a, t);
  }

  friend Jet exp(const Jet& a) {
    const double e = std::exp(a.value());
    std::array<double, D + 1> t{};
    double f = 1.0;
    for (int k = 0; k <= D; ++k) {
      if (k > 0) f /= k;
      t[k] = e * f;
    }
    return compose(a, t);
  }

  friend Jet log(const Jet& a) {
    const double x = a.value();
    std::array<double, D + 1> t{};
    t[0] = std::log(x);
    double v = 1.0 / x;
    for (int k = 1; k <= D; ++k) {
      t[k] = ((k % 2 == 1) ? 1.0 : -1.0) * v / k;
      v /= x;
    }
    return compose(a, t);
  }

  friend Jet sin(const Jet& a) { return trig(a, false); }
  friend Jet cos(const Jet& a) { return trig(a, true); }

  /// a^p for real p; a.value() > 0 unless p is a non-negative integer.
  friend Jet pow(const Jet& a, double p) {
    const double x = a.value();
    std::array<double, D + 1> t{};
    double coef = 1.0;
    for (int k = 0; k <= D; ++k) {
      t[k] = coef * std::pow(x, p - k);
      coef *= (p - k) / (k + 1);
    }
    return compose(a, t);
  }

  friend Jet sqrt(const Jet& a) { return pow(a, 0.5); }

 private:
  static Jet trig(const Jet& a, bool cosine) {
    const double s = std::sin(a.value());
    const double c = std::cos(a.value());
    // derivatives of sin cycle through sin, cos, -sin, -cos
    const double sin_cycle[4] = {s, c, -s, -c};
    const double cos_cycle[4] = {c, -s, -c, s};
    std::array<double, D + 1> t{};
    double f = 1.0;
    for (int k = 0; k <= D; ++k) {
      if (k > 0) f /= k;
      t[k] = (cosine ? cos_cycle[k % 4] : sin_cycle[k % 4]) * f;
    }
    return compose(a, t);
  }

  std::array<double, size> c_;
};

}  // namespace datri

#endif  // DATRI_JET_HPP
