#include "oracles.hpp"

#include "datri/sphere.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace datri;
using oracle::Sampler;

namespace {

const double k8Pi = 8 * kPi;
const double k4Pi = 4 * kPi;
const ChartPoint kExample(0.3, 0.2, 0.0);

models::ConformalSpaceForm sphere() { return models::ConformalSpaceForm("round_sphere", 1.0); }
models::ConformalSpaceForm hyperbolic() { return models::ConformalSpaceForm("hyperbolic", -1.0); }
models::PerturbedConformal example_perturbed() { return models::PerturbedConformal(0.1, 0.0); }

// Agreement: 1e-4 absolute or 1e-3 relative, whichever is looser.
bool series_close(double fitted, double predicted) {
  return std::abs(fitted - predicted) <= std::max(1e-4, 1e-3 * std::abs(predicted));
}

// Integral of x^2a y^2b z^2c over the unit sphere.
double even_moment(int a, int b, int c) {
  return 2 * std::tgamma(a + 0.5) * std::tgamma(b + 0.5) * std::tgamma(c + 0.5) / std::tgamma(a + b + c + 1.5);
}

double integrate(const QuadratureRule& q, const std::function<double(const Vec3&)>& f) {
  KahanSum s;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) s.add(q.weights[i] * f(q.nodes[i]));
  return s.value();
}

// ---------------------------------------------------------------------------
// quadrature

TEST(Quadrature, FullSphereWeightsAndExactness) {
  const QuadratureRule q = full_sphere_rule();
  EXPECT_EQ(q.nodes.size(), 24u * 48u);
  for (double w : q.weights) EXPECT_GT(w, 0.0);
  EXPECT_NEAR(q.total_weight(), k4Pi, 1e-12);
  EXPECT_GE(q.exactness_degree(), 35);
  for (const auto& n : q.nodes) EXPECT_NEAR(n.norm(), 1.0, 1e-15);
  const std::array<std::array<int, 3>, 5> cases = {{{2, 0, 0}, {1, 1, 1}, {0, 0, 17}, {8, 5, 4}, {3, 6, 0}}};
  for (const auto& c : cases) {
    const double got = integrate(q, [&](const Vec3& x) {
      return std::pow(x.x(), 2 * c[0]) * std::pow(x.y(), 2 * c[1]) * std::pow(x.z(), 2 * c[2]);
    });
    const double want = even_moment(c[0], c[1], c[2]);
    EXPECT_NEAR(got, want, 1e-13 * std::max(1.0, want)) << c[0] << c[1] << c[2];
  }
  // odd monomials vanish
  EXPECT_NEAR(integrate(q, [](const Vec3& x) { return std::pow(x.x(), 3) * x.y() * x.y() * x.z(); }), 0.0, 1e-14);
}

TEST(Quadrature, HemisphereRule) {
  Sampler s(31);
  for (int i = 0; i < 5; ++i) {
    const Vec3 axis = s.unit3();
    const QuadratureRule q = hemisphere_rule(axis);
    EXPECT_NEAR(q.total_weight(), 2 * kPi, 1e-13);
    for (const auto& n : q.nodes) EXPECT_GE(n.dot(axis), 0.0);
    // integral of <x, axis> over the hemisphere is pi
    EXPECT_NEAR(integrate(q, [&](const Vec3& x) { return x.dot(axis); }), kPi, 1e-12);
  }
}

TEST(Quadrature, CompensatedSumIsOrderStable) {
  KahanSum k;
  k.add(1e16);
  for (int i = 0; i < 1000; ++i) k.add(1.0);
  k.add(-1e16);
  EXPECT_EQ(k.value(), 1000.0);
}

// ---------------------------------------------------------------------------
// tau_sphere

TEST(TauSphere, ConstantCurvatureClosedForms) {
  models::Euclidean e;
  const auto s = sphere();
  const auto h = hyperbolic();
  for (double r : {0.05, 0.3, 0.7}) {
    EXPECT_NEAR(tau_sphere(e, TangentVector{ChartPoint(0.2, 0.1, 0), Vec3(0, r, 0)}), 2 / (r * r), 1e-8 / (r * r));
    EXPECT_NEAR(tau_sphere(s, TangentVector{ChartPoint(0, 0, 0), Vec3(r / 2, 0, 0)}), 2 / std::pow(std::sin(r), 2),
                1e-8 / (r * r));
    EXPECT_NEAR(tau_sphere(h, TangentVector{ChartPoint(0, 0, 0), Vec3(0, 0, r / 2)}), 2 / std::pow(std::sinh(r), 2),
                1e-8 / (r * r));
  }
}

TEST(TauSphere, ZeroVectorRejected) {
  models::Euclidean e;
  EXPECT_THROW(tau_sphere(e, TangentVector{ChartPoint(0, 0, 0), Vec3::Zero()}), DomainError);
}

// ---------------------------------------------------------------------------
// Steiner identity

TEST(Steiner, EuclideanExact) {
  models::Euclidean e;
  EXPECT_NEAR(steiner_residual(e, ChartPoint(1, 2, 3), Vec3(0, 0, 1), 0.4), 0.0, 1e-9);
}

TEST(Steiner, RoundSphere) {
  const auto s = sphere();
  Sampler rng(32);
  for (int i = 0; i < 5; ++i) {
    const ChartPoint p(0.1, -0.2, 0.05);
    EXPECT_LT(std::abs(steiner_residual(s, p, rng.unit(s, p), 0.5)), 1e-6);
  }
}

TEST(Steiner, AllModelsOnTwentySampleGrid) {
  for (const auto& name : oracle::all_models()) {
    const auto inst = oracle::instance(name);
    Sampler rng(33);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const ChartPoint& p = inst.base_points[static_cast<std::size_t>(i) % inst.base_points.size()];
      const double r = rng.uniform(0.1, 0.8) * inst.working_radius;
      worst = std::max(worst, std::abs(steiner_residual(*inst.model, p, rng.unit(*inst.model, p), r)));
    }
    EXPECT_LT(worst, 1e-5) << name;
  }
}

TEST(Steiner, RadialDerivativesMatchFiniteDifferences) {
  // theta' and theta'' come from the Jacobi system; check them against differences of theta itself
  const auto m = example_perturbed();
  const Vec3 u = oracle::unit_e1(m, kExample);
  const double r = 0.4, h = 1e-3;
  const SphereNode n = sphere_node(m, kExample, u, r);
  auto th = [&](double rr) { return sphere_node(m, kExample, u, rr).theta; };
  auto d1 = [&](double s) { return (th(r + s) - th(r - s)) / (2 * s); };
  auto d2 = [&](double s) { return (th(r + s) - 2 * n.theta + th(r - s)) / (s * s); };
  EXPECT_NEAR(n.dtheta, (4 * d1(h / 2) - d1(h)) / 3, 1e-9);
  EXPECT_NEAR(n.d2theta, (4 * d2(h / 2) - d2(h)) / 3, 1e-6);
}

// ---------------------------------------------------------------------------
// totals

TEST(Totals, GaussBonnetOnEveryModel) {
  for (const auto& name : oracle::all_models()) {
    const auto inst = oracle::instance(name);
    for (double r : {0.2, 0.4, 0.8 * inst.working_radius}) {
      const double t = total_scalar_sphere(*inst.model, inst.base_points[1], r);
      EXPECT_NEAR(t / k8Pi, 1.0, 1e-5) << name << " r=" << r;
    }
  }
}

TEST(Totals, EuclideanExamples) {
  models::Euclidean e;
  EXPECT_NEAR(total_scalar_sphere(e, ChartPoint(0, 0, 0), 0.5), k8Pi, 1e-10);
  EXPECT_NEAR(total_scalar_hemisphere(e, TangentVector{ChartPoint(0, 0, 0), Vec3(0.3, 0.4, 0)}), k4Pi, 1e-10);
}

TEST(Totals, HemisphereAdditivity) {
  for (const auto& name : oracle::all_models()) {
    const auto inst = oracle::instance(name);
    Sampler rng(34);
    const ChartPoint& p = inst.base_points[2];
    const double r = 0.3 * inst.working_radius / 0.9;
    const Vec3 v = r * rng.unit(*inst.model, p);
    const double plus = total_scalar_hemisphere(*inst.model, TangentVector{p, v});
    const double minus = total_scalar_hemisphere(*inst.model, TangentVector{p, -v});
    const double full = total_scalar_sphere(*inst.model, p, r);
    EXPECT_NEAR((plus + minus) / full, 1.0, 1e-9) << name;
  }
}

TEST(Totals, BergerHemispheresAreFourPi) {
  const auto inst = oracle::instance("berger_sphere", {{"lambda", 0.8}});
  Sampler rng(35);
  const ChartPoint& p = inst.base_points[0];
  for (int i = 0; i < 20; ++i) {
    const double t = total_scalar_hemisphere(*inst.model, TangentVector{p, 0.3 * rng.unit(*inst.model, p)});
    EXPECT_NEAR(t / k4Pi, 1.0, 1e-5);
  }
}

TEST(Totals, PerturbedHemispheresDiffer) {
  const auto m = example_perturbed();
  const Vec3 v = 0.5 * oracle::unit_e1(m, kExample);
  const double plus = total_scalar_hemisphere(m, TangentVector{kExample, v});
  const double minus = total_scalar_hemisphere(m, TangentVector{kExample, -v});
  EXPECT_GT(std::abs(plus - minus), 1e-3);
  EXPECT_NEAR((plus + minus) / k8Pi, 1.0, 1e-5);
}

// ---------------------------------------------------------------------------
// series

TEST(Series, EuclideanCoefficients) {
  models::Euclidean e;
  const auto grid = SeriesGrid::for_working_radius(0.9);
  const SeriesFit a = theta_series(e, ChartPoint(0, 0, 0), Vec3(1, 0, 0), kThetaSeriesOrder, grid);
  EXPECT_NEAR(a.coeff(0), 1.0, 1e-10);
  for (int k = 1; k <= a.k_max(); ++k) EXPECT_NEAR(a.coeff(k), 0.0, 1e-8) << k;
  const SeriesFit b = tauS_theta_series(e, ChartPoint(0, 0, 0), Vec3(1, 0, 0), kTauSThetaSeriesOrder, grid);
  EXPECT_EQ(b.k_min, -2);
  EXPECT_NEAR(b.coeff(-2), 2.0, 1e-10);
  for (int k = -1; k <= b.k_max(); ++k) EXPECT_NEAR(b.coeff(k), 0.0, 1e-6) << k;
}

TEST(Series, RoundSphereCoefficients) {
  const auto s = sphere();
  const auto grid = SeriesGrid::for_working_radius(0.9);
  const Vec3 u(0.5, 0, 0);
  const SeriesFit a = theta_series(s, ChartPoint(0, 0, 0), u, kThetaSeriesOrder, grid);
  // (sin r / r)^2 = 1 - r^2/3 + 2 r^4/45 - ...
  EXPECT_NEAR(a.coeff(0), 1.0, 1e-9);
  EXPECT_NEAR(a.coeff(2), -1.0 / 3.0, 1e-8);
  EXPECT_NEAR(a.coeff(3), 0.0, 1e-8);
  EXPECT_NEAR(a.coeff(4), 2.0 / 45.0, 1e-6);
  const SeriesFit b = tauS_theta_series(s, ChartPoint(0, 0, 0), u, kTauSThetaSeriesOrder, grid);
  EXPECT_NEAR(b.coeff(-2), 2.0, 1e-8);
  EXPECT_NEAR(b.coeff(0), 0.0, 1e-6);
  EXPECT_NEAR(b.coeff(1), 0.0, 1e-6);
}

TEST(Series, MatchesCurvatureFormulasOnEveryModel) {
  for (const auto& name : oracle::all_models()) {
    const auto inst = oracle::instance(name);
    const auto grid = SeriesGrid::for_working_radius(inst.working_radius);
    Sampler rng(36);
    for (const ChartPoint& p : inst.base_points) {
      const Vec3 u = rng.unit(*inst.model, p);
      const RadialProfile prof = radial_profile(*inst.model, p, u, grid);
      const SeriesFit a = theta_series(prof, kThetaSeriesOrder);
      const SeriesFit b = tauS_theta_series(prof, kTauSThetaSeriesOrder);
      const SeriesPrediction want = series_prediction(*inst.model, p, u);
      EXPECT_NEAR(a.coeff(0), 1.0, 1e-6) << name;
      EXPECT_NEAR(a.coeff(1), 0.0, 1e-6) << name;
      EXPECT_TRUE(series_close(a.coeff(2), want.a2)) << name << " a2 " << a.coeff(2) << " vs " << want.a2;
      EXPECT_TRUE(series_close(a.coeff(3), want.a3)) << name << " a3 " << a.coeff(3) << " vs " << want.a3;
      EXPECT_TRUE(series_close(b.coeff(-2), want.b_m2)) << name;
      EXPECT_TRUE(series_close(b.coeff(-1), want.b_m1)) << name;
      EXPECT_TRUE(series_close(b.coeff(0), want.b0)) << name << " b0 " << b.coeff(0) << " vs " << want.b0;
      EXPECT_TRUE(series_close(b.coeff(1), want.b1)) << name << " b1 " << b.coeff(1) << " vs " << want.b1;
    }
  }
}

TEST(Series, PerturbedCrossModuleConsistency) {
  const auto m = example_perturbed();
  const Vec3 u = oracle::unit_e1(m, kExample);
  const auto grid = SeriesGrid::for_working_radius(0.9);
  const RadialProfile prof = radial_profile(m, kExample, u, grid);
  const double druu = nabla_ricci_uuu(m, kExample, u);
  const RicciJet j = ricci_jet(m, kExample);
  EXPECT_GT(std::abs(druu), 1e-3);
  EXPECT_NEAR(theta_series(prof, kThetaSeriesOrder).coeff(3), -druu / 12, 1e-5);
  EXPECT_NEAR(tauS_theta_series(prof, kTauSThetaSeriesOrder).coeff(1), j.nabla_tau_u(u) - 8.0 / 3.0 * druu, 1e-4);
}

TEST(Series, FitReportsResidualAndUncertainty) {
  const auto inst = oracle::instance("heisenberg");
  const auto grid = SeriesGrid::for_working_radius(inst.working_radius);
  const SeriesFit a = theta_series(*inst.model, ChartPoint(0, 0, 0), Vec3(1, 0, 0), kThetaSeriesOrder, grid);
  EXPECT_EQ(a.radii.size(), 12u);
  EXPECT_NEAR(a.radii.front(), 0.05 * 0.9, 1e-15);
  EXPECT_NEAR(a.radii.back(), 0.5 * 0.9, 1e-15);
  EXPECT_LT(a.residual, 1e-10);
  EXPECT_LT(a.condition, kMaxFitCondition);
  for (int k = 0; k <= a.k_max(); ++k) EXPECT_GE(a.uncertainty(k), 0.0);
}

// ---------------------------------------------------------------------------
// recursion

TEST(Recursion, RoundSphereClosedForm) {
  // (-1/3)(12) - ((2 - 6) 1 + 0) = 0
  SeriesFit a{0, {1.0, 0.0, -1.0 / 3.0}, {0, 0, 0}, 0, 1, {}};
  SeriesFit b{-2, {2.0, 0.0, 0.0}, {0, 0, 0}, 0, 1, {}};
  EXPECT_DOUBLE_EQ(recursion_residual(a, b, 2.0 - 6.0, 0), 0.0);
}

TEST(Recursion, FittedSeriesOnCyclicParallelModels) {
  for (const char* name : {"euclidean", "round_sphere", "heisenberg"}) {
    const auto inst = oracle::instance(name);
    const auto grid = SeriesGrid::for_working_radius(inst.working_radius);
    const ChartPoint& p = inst.base_points[1];
    Sampler rng(37);
    const Vec3 u = rng.unit(*inst.model, p);
    for (int k = 0; k <= 2; ++k) EXPECT_LT(std::abs(recursion_residual(*inst.model, p, u, k, grid)), 1e-4) << name << k;
  }
}

TEST(Recursion, RefusedWhenRicciIsNotCyclicParallel) {
  const auto m = example_perturbed();
  EXPECT_THROW(recursion_residual(m, kExample, oracle::unit_e1(m, kExample), 0, SeriesGrid::for_working_radius(0.9)),
               DomainError);
}

}  // namespace
