#ifndef DATRI_METRIC_MODEL_HPP
#define DATRI_METRIC_MODEL_HPP

#include "datri/jet.hpp"
#include "datri/types.hpp"

#include <map>
#include <sstream>
#include <string>

namespace datri {

using Params = std::map<std::string, double>;

template <class T>
using Sym3 = std::array<std::array<T, 3>, 3>;

template <int D>
using MetricJet = Sym3<Jet<D>>;

/// A smooth Riemannian metric on one coordinate box of R^3.
///
/// The metric is closed-form; implementations provide it for plain doubles and
/// for Jet<2>/Jet<4> so curvature can be differentiated exactly. Models hold no
/// mutable state and may be shared across threads.
class MetricModel {
 public:
  MetricModel(std::string name, Params params, Box domain)
      : name_(std::move(name)), params_(std::move(params)), domain_(domain) {}
  virtual ~MetricModel() = default;

  MetricModel(const MetricModel&) = delete;
  MetricModel& operator=(const MetricModel&) = delete;

  const std::string& name() const { return name_; }
  const Params& params() const { return params_; }
  const Box& chart_domain() const { return domain_; }

  double param(const std::string& key) const { return params_.at(key); }

  void require_in_chart(const Vec3& x) const {
    if (!domain_.contains(x)) {
      std::ostringstream os;
      os << "point (" << x.x() << ", " << x.y() << ", " << x.z() << ") outside the chart of model '"
         << name_ << "'";
      throw ChartExitError(os.str());
    }
  }

  /// g_ij at x; throws ChartExitError outside the chart and ModelError if not positive definite.
  Mat3 metric(const Vec3& x) const {
    require_in_chart(x);
    Mat3 g = metric_unchecked(x);
    if (Eigen::LLT<Mat3>(g).info() != Eigen::Success)
      throw ModelError("metric of model '" + name_ + "' is not positive definite at a chart point");
    return g;
  }

  virtual Mat3 metric_unchecked(const Vec3& x) const = 0;
  virtual MetricJet<2> metric_jet2(const Vec3& x) const = 0;
  virtual MetricJet<4> metric_jet4(const Vec3& x) const = 0;

  template <int D>
  MetricJet<D> metric_jet(const Vec3& x) const {
    static_assert(D == 2 || D == 4, "metric jets are provided for degree 2 and 4");
    require_in_chart(x);
    if constexpr (D == 2)
      return metric_jet2(x);
    else
      return metric_jet4(x);
  }

 private:
  std::string name_;
  Params params_;
  Box domain_;
};

/// CRTP adapter: Derived supplies
///   template <class T> Sym3<T> components(const std::array<T, 3>& x) const;
template <class Derived>
class ClosedFormMetric : public MetricModel {
 public:
  using MetricModel::MetricModel;

  Mat3 metric_unchecked(const Vec3& x) const final {
    const auto g = self().template components<double>({x[0], x[1], x[2]});
    Mat3 out;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out(i, j) = g[i][j];
    return out;
  }
  MetricJet<2> metric_jet2(const Vec3& x) const final { return seeded<2>(x); }
  MetricJet<4> metric_jet4(const Vec3& x) const final { return seeded<4>(x); }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }

  template <int D>
  MetricJet<D> seeded(const Vec3& x) const {
    const std::array<Jet<D>, 3> vars = {Jet<D>::variable(0, x[0]), Jet<D>::variable(1, x[1]),
                                        Jet<D>::variable(2, x[2])};
    return self().template components<Jet<D>>(vars);
  }
};

}  // namespace datri

#endif  // DATRI_METRIC_MODEL_HPP
