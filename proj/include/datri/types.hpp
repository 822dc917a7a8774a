#ifndef DATRI_TYPES_HPP
#define DATRI_TYPES_HPP

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>

namespace datri {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Error hierarchy. Everything thrown by the library derives from Error so the
// CLI can map failures to exit codes in one place.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates an operation's precondition (non-unit direction, degenerate plane, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A point or integrated path left the model's chart box.
class ChartExitError : public Error {
 public:
  using Error::Error;
};

/// det A <= 0 along a radial geodesic: the radius reached a conjugate point.
class ConjugatePointError : public Error {
 public:
  using Error::Error;
};

/// Tube parameterization stopped being an immersion (det I <= 0).
class ImmersionError : public Error {
 public:
  using Error::Error;
};

/// Least-squares fit rejected (ill-conditioned or residual above threshold).
class FitError : public Error {
 public:
  using Error::Error;
};

/// Model metric failed positive definiteness at a point.
class ModelError : public Error {
 public:
  using Error::Error;
};

struct ChartPoint {
  Vec3 coords = Vec3::Zero();

  ChartPoint() = default;
  explicit ChartPoint(const Vec3& x) : coords(x) {}
  ChartPoint(double x, double y, double z) : coords(x, y, z) {}
};

/// Axis-aligned box in chart coordinates.
struct Box {
  Vec3 lo = Vec3::Constant(-1.0);
  Vec3 hi = Vec3::Constant(1.0);

  bool contains(const Vec3& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
};

/// Tangent vector at a chart point, in coordinate components.
struct TangentVector {
  ChartPoint base;
  Vec3 components = Vec3::Zero();
};

}  // namespace datri

#endif  // DATRI_TYPES_HPP
