#include "oracles.hpp"

#include "datri/battery.hpp"
#include "datri/tube.hpp"

#include <gtest/gtest.h>

using namespace datri;
using oracle::Sampler;

namespace {

const double k8Pi = 8 * kPi;
const ChartPoint kExample(0.3, 0.2, 0.0);

models::ConformalSpaceForm sphere() { return models::ConformalSpaceForm("round_sphere", 1.0); }
models::PerturbedConformal example_perturbed() { return models::PerturbedConformal(0.1, 0.0); }

// Normal frame of the axis at the parameters of a Gauss-Legendre rule on [a, b].
std::vector<CurveFrame> frames(const MetricModel& m, const RegularCurve& c, int n = 5) {
  return tube_axis_frames(m, c, gauss_legendre(n, c.a(), c.b()), OdeSettings{});
}

// ---------------------------------------------------------------------------
// tube_geometry_at

TEST(TubeGeometry, FlatCylinder) {
  // outward normal is the radial velocity, so II(J_phi, J_phi) = +r for the round cross-section
  models::Euclidean e;
  const GeodesicCurve axis(ChartPoint(0, 0, 0), Vec3(1, 0, 0), 1.0);
  const double r = 0.3;
  for (const CurveFrame& f : frames(e, axis))
    for (double phi : {0.0, 0.7, 2.5, 4.0}) {
      const TubeNode n = tube_geometry_at(e, f, phi, r);
      EXPECT_LE((n.first_form - Vec2(1.0, r * r).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((n.second_form - Vec2(0.0, r).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_NEAR(n.gauss_curvature, 0.0, 1e-12);
      EXPECT_NEAR(n.area_element, r, 1e-12);
      EXPECT_NEAR((n.point - f.position).norm(), r, 1e-12);
    }
}

TEST(TubeGeometry, GreatCircleTubeOnRoundSphere) {
  // the unit chart circle in z = 0 is a unit-speed great circle
  const auto s = sphere();
  const GeodesicCurve axis(ChartPoint(1, 0, 0), Vec3(0, 1, 0), 2 * kPi);
  for (double r : {0.15, 0.4, 0.6}) {
    for (const CurveFrame& f : frames(s, axis))
      for (double phi : {0.3, 1.9, 5.0}) {
        const TubeNode n = tube_geometry_at(s, f, phi, r);
        // J_phi reproduces the sphere Jacobi field sin(r); J_t is cos(r) times the axis direction
        EXPECT_NEAR(n.A(1, 1), std::sin(r), 1e-7);
        EXPECT_NEAR(n.A(0, 0), std::cos(r), 1e-7);
        EXPECT_NEAR(n.A(0, 1), 0.0, 1e-7);
        EXPECT_NEAR(n.A(1, 0), 0.0, 1e-7);
        // principal curvatures -tan r and cot r, ambient K = 1
        EXPECT_NEAR(n.second_form(0, 0) / n.first_form(0, 0), -std::tan(r), 1e-7);
        EXPECT_NEAR(n.second_form(1, 1) / n.first_form(1, 1), 1 / std::tan(r), 1e-7);
        EXPECT_NEAR(n.ambient_sectional, 1.0, 1e-9);
        EXPECT_NEAR(n.gauss_curvature, 0.0, 1e-8);
      }
    const TubeTotal t = total_scalar_tube_detailed(s, axis, r);
    EXPECT_NEAR(t.total, 0.0, 1e-8);
    EXPECT_NEAR(t.area, 2 * kPi * std::sin(r) * std::cos(r) * 2 * kPi, 1e-9);
  }
}

TEST(TubeGeometry, ImmersionFailureReported) {
  models::Euclidean e;
  const ChartCircle c(Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 1, 0), 0.2);
  EXPECT_THROW(total_scalar_tube(e, c, 0.3), ImmersionError);
  EXPECT_NO_THROW(total_scalar_tube(e, c, 0.15));
}

// ---------------------------------------------------------------------------
// total_scalar_tube

TEST(TubeTotal, EuclideanCylinderAndTorus) {
  models::Euclidean e;
  const GeodesicCurve axis(ChartPoint(0.2, -0.4, 1), Vec3(0.6, 0, 0.8), 1.7);
  EXPECT_NEAR(total_scalar_tube(e, axis, 0.3), 0.0, 1e-6);
  const double R = 1.0, r = 0.3;
  const ChartCircle c(Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 0, 1), R);
  const TubeTotal t = total_scalar_tube_detailed(e, c, r);
  EXPECT_NEAR(t.total, 0.0, 1e-9);
  EXPECT_NEAR(t.area, 4 * kPi * kPi * R * r, 1e-9);
  // |2K| integrates to 16 pi; the kink of |K| limits the periodic rule to about 1e-3
  EXPECT_NEAR(t.absolute_total / (2 * k8Pi), 1.0, 1e-2);
}

TEST(TubeTotal, TorusClosureOnEveryModel) {
  for (const auto& name : oracle::all_models()) {
    const auto inst = oracle::instance(name);
    const double wr = inst.working_radius;
    const ChartCircle c = frame_circle(*inst.model, inst.base_points[0], 0.6 * wr);
    const TubeTotal t = total_scalar_tube_detailed(*inst.model, c, 0.15 * wr);
    EXPECT_LT(std::abs(t.total), 1e-5 * std::max(1.0, t.absolute_total)) << name << " total " << t.total;
    EXPECT_LT(t.max_second_form_asymmetry, 1e-8) << name;
  }
}

TEST(TubeTotal, HeisenbergGeodesicSegment) {
  const auto inst = oracle::instance("heisenberg");
  const ChartPoint p(0.1, -0.2, 0.3);
  Sampler rng(41);
  const GeodesicCurve axis(p, rng.unit(*inst.model, p), 1.0);
  EXPECT_LT(std::abs(total_scalar_tube(*inst.model, axis, 0.2)), 1e-4);
}

TEST(TubeTotal, DatriModelsVanishOnArcs) {
  for (const char* name : {"heisenberg", "berger_sphere", "product_s2xr"}) {
    const auto inst = oracle::instance(name);
    const double wr = inst.working_radius;
    const ChartCircle arc = frame_circle(*inst.model, inst.base_points[1], 0.6 * wr, 0.0, 2.0);
    const TubeTotal t = total_scalar_tube_detailed(*inst.model, arc, 0.25 * wr);
    EXPECT_LT(std::abs(t.total), 1e-4) << name;
    EXPECT_LT(t.max_second_form_asymmetry, 1e-8) << name;
  }
}

TEST(TubeTotal, PerturbedDetected) {
  const auto m = example_perturbed();
  const GeodesicCurve axis(kExample, oracle::unit_e1(m, kExample), 1.0);
  EXPECT_GT(std::abs(total_scalar_tube(m, axis, 0.4)), 1e-4);
}

// ---------------------------------------------------------------------------
// capsule_total

TEST(Capsule, EuclideanSegment) {
  models::Euclidean e;
  const GeodesicCurve axis(ChartPoint(0, 0, 0), Vec3(0, 1, 0), 1.0);
  const CapsuleTotal c = capsule_total_detailed(e, axis, 0.3);
  EXPECT_NEAR(c.total(), k8Pi, 1e-8);
  EXPECT_NEAR(c.start_cap, 4 * kPi, 1e-8);
  EXPECT_NEAR(c.end_cap, 4 * kPi, 1e-8);
}

TEST(Capsule, PerturbedStillEightPi) {
  const auto m = example_perturbed();
  const GeodesicCurve axis(kExample, oracle::unit_e1(m, kExample), 0.5);
  const CapsuleTotal c = capsule_total_detailed(m, axis, 0.4);
  EXPECT_NEAR(c.total() / k8Pi, 1.0, 1e-4);
  EXPECT_GT(std::abs(c.tube), 1e-4);
  EXPECT_GT(std::abs(c.start_cap - 4 * kPi), 1e-4);
}

TEST(Capsule, BergerGeodesicSegment) {
  const auto inst = oracle::instance("berger_sphere");
  const ChartPoint& p = inst.base_points[0];
  Sampler rng(42);
  const GeodesicCurve axis(p, rng.unit(*inst.model, p), 0.5);
  EXPECT_NEAR(capsule_total(*inst.model, axis, 0.25) / k8Pi, 1.0, 1e-5);
}

TEST(Capsule, NonGeodesicAxisOnPerturbedModel) {
  const auto inst = oracle::instance("perturbed_conformal");
  const ChartCircle arc = frame_circle(*inst.model, inst.base_points[1], 0.5, 0.0, 1.5);
  EXPECT_NEAR(capsule_total(*inst.model, arc, 0.2) / k8Pi, 1.0, 1e-4);
}

// ---------------------------------------------------------------------------
// cylinder coefficient

TEST(Cylinder, EuclideanIsZero) {
  models::Euclidean e;
  const CylinderFit f = cylinder_coefficient(e, ChartPoint(0, 0, 0), Vec3(1, 0, 0), 0.5, cylinder_radius_grid(0.9));
  EXPECT_NEAR(f.c3, 0.0, 1e-8);
  EXPECT_NEAR(f.mean_hat_a, 0.0, 1e-12);
  EXPECT_EQ(f.radii.size(), 5u);
}

TEST(Cylinder, HeisenbergIsZero) {
  const auto inst = oracle::instance("heisenberg");
  Sampler rng(43);
  const ChartPoint p(0.2, 0.1, -0.1);
  const CylinderFit f = cylinder_coefficient(*inst.model, p, rng.unit(*inst.model, p), 0.5,
                                             cylinder_radius_grid(inst.working_radius));
  EXPECT_LT(std::abs(f.c3), 2e-3);
  EXPECT_LT(std::abs(f.mean_hat_a), 1e-8);
}

TEST(Cylinder, PerturbedMatchesHatA) {
  const auto m = example_perturbed();
  const CylinderFit f = cylinder_coefficient(m, kExample, oracle::unit_e1(m, kExample), 0.5, cylinder_radius_grid(0.9));
  ASSERT_GT(std::abs(f.mean_hat_a), 1e-3);
  EXPECT_NEAR(f.c3 / f.mean_hat_a, 1.0, 0.05);
  EXPECT_LT(f.residual, kCylinderFitTolerance);
}

TEST(Cylinder, HatAAgreesWithDirectDerivatives) {
  const auto m = example_perturbed();
  const Vec3 u = oracle::unit_e1(m, kExample);
  const double want = oracle::tau_along(m, kExample, u).second - 2 * oracle::ricci_along(m, kExample, u).second;
  EXPECT_NEAR(cylinder_hat_a(m, kExample, u), want, 1e-6);
}

TEST(Cylinder, RejectsNonUnitDirection) {
  models::Euclidean e;
  EXPECT_THROW(cylinder_coefficient(e, ChartPoint(0, 0, 0), Vec3(2, 0, 0), 0.5, cylinder_radius_grid(0.9)),
               DomainError);
}

// ---------------------------------------------------------------------------
// K(nu(t)) profile

std::vector<double> symmetric_grid(double half, int n) {
  std::vector<double> t;
  for (int i = 0; i < n; ++i) t.push_back(-half + 2 * half * i / (n - 1));
  return t;
}

TEST(Knu, RoundSphereConstantOne) {
  const auto s = sphere();
  Sampler rng(44);
  const ChartPoint p(0.1, 0.0, -0.1);
  const SeriesFit f = knu_profile(s, p, rng.unit(s, p), symmetric_grid(0.36, 9));
  EXPECT_NEAR(f.coeff(2), 0.0, 1e-9);
  EXPECT_NEAR(f.coeff(1), 0.0, 1e-9);
  EXPECT_NEAR(f.coeff(0), 1.0, 1e-9);
  EXPECT_LT(f.residual, 1e-6);
}

TEST(Knu, EuclideanZero) {
  models::Euclidean e;
  const SeriesFit f = knu_profile(e, ChartPoint(0, 0, 0), Vec3(0, 0, 1), symmetric_grid(0.36, 9));
  for (int k = 0; k <= 2; ++k) EXPECT_NEAR(f.coeff(k), 0.0, 1e-12);
}

TEST(Knu, HeisenbergHorizontalGeodesic) {
  models::Heisenberg m;
  const SeriesFit f = knu_profile(m, ChartPoint(0, 0, 0), Vec3(1, 0, 0), symmetric_grid(0.36, 9));
  EXPECT_NEAR(f.coeff(2), 0.0, 1e-9);
  EXPECT_NEAR(f.coeff(1), 0.0, 1e-9);
  EXPECT_NEAR(f.coeff(0), oracle::heisenberg().k23, 1e-9);
  EXPECT_NEAR(f.coeff(0), 0.25, 1e-9);
  EXPECT_LT(f.residual, 1e-6);
}

TEST(Knu, ValuesAreHalfTauMinusRicci) {
  const auto m = example_perturbed();
  const Vec3 u = oracle::unit_e1(m, kExample);
  const std::vector<double> grid = {-0.2, 0.0, 0.3};
  const auto k = knu_values(m, kExample, u, grid);
  const CurvatureBundle b = curvature_at(m, kExample);
  EXPECT_NEAR(k[1], 0.5 * b.tau - b.ricci_form(u, u), 1e-12);
  const GeodesicPath fwd(m, TangentVector{kExample, u}, 0.3);
  const auto st = fwd.state_at(0.3);
  const CurvatureBundle e = curvature_at(m, ChartPoint(st.position));
  EXPECT_NEAR(k[2], 0.5 * e.tau - e.ricci_form(st.velocity, st.velocity), 1e-9);
}

}  // namespace
