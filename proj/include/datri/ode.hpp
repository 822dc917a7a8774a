#ifndef DATRI_ODE_HPP
#define DATRI_ODE_HPP

// Thin wrapper over Boost.Odeint's Dormand-Prince 5(4) pair.

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cstddef>
#include <vector>

namespace datri {

struct OdeSettings {
  double rel_tol = 1e-11;
  double abs_tol = 1e-13;
  double initial_step = 1e-3;
};

template <std::size_t N>
using OdeState = std::array<double, N>;

namespace detail {

template <std::size_t N>
auto make_stepper(const OdeSettings& s) {
  namespace odeint = boost::numeric::odeint;
  return odeint::make_controlled(s.abs_tol, s.rel_tol, odeint::runge_kutta_dopri5<OdeState<N>>());
}

}  // namespace detail

/// Advance x from t0 to t1 (either direction). The observer, if given, sees every accepted step.
template <std::size_t N, class Rhs, class Observer>
void integrate_to(Rhs&& rhs, OdeState<N>& x, double t0, double t1, const OdeSettings& s,
                  Observer&& observer) {
  namespace odeint = boost::numeric::odeint;
  if (t0 == t1) return;
  const double dt = t1 > t0 ? s.initial_step : -s.initial_step;
  odeint::integrate_adaptive(detail::make_stepper<N>(s), rhs, x, t0, t1, dt, observer);
}

template <std::size_t N, class Rhs>
void integrate_to(Rhs&& rhs, OdeState<N>& x, double t0, double t1, const OdeSettings& s) {
  integrate_to<N>(rhs, x, t0, t1, s, [](const OdeState<N>&, double) {});
}

/// States at each of the (monotone) output times; times[0] is the initial time of x.
template <std::size_t N, class Rhs>
std::vector<OdeState<N>> integrate_at(Rhs&& rhs, OdeState<N> x, const std::vector<double>& times,
                                      const OdeSettings& s) {
  std::vector<OdeState<N>> out;
  out.reserve(times.size());
  if (times.empty()) return out;
  out.push_back(x);
  for (std::size_t i = 1; i < times.size(); ++i) {
    integrate_to<N>(rhs, x, times[i - 1], times[i], s);
    out.push_back(x);
  }
  return out;
}

}  // namespace datri

#endif  // DATRI_ODE_HPP
