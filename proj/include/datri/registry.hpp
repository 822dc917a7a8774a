#ifndef DATRI_REGISTRY_HPP
#define DATRI_REGISTRY_HPP

// Named model metrics with parameter schemas, expected classifications,
// working radii, base points and reference curvature values.

#include "datri/curvature.hpp"
#include "datri/models.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace datri {

enum class DatriExpectation { yes, no, unknown };

inline const char* to_string(DatriExpectation e) {
  switch (e) {
    case DatriExpectation::yes: return "yes";
    case DatriExpectation::no: return "no";
    case DatriExpectation::unknown: return "unknown";
  }
  return "unknown";
}

struct ParamSpec {
  std::string name;
  double default_value = 0.0;
  std::string description;
  std::function<bool(double)> valid = [](double) { return true; };
  std::string constraint = "any real";
};

/// Closed-form value checked against metric_core whenever the model is instantiated.
struct ReferenceValue {
  std::string description;
  std::function<double(const Params&)> expected;
  std::function<double(const MetricModel&, const Params&)> computed;
};

struct ModelRegistryEntry {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;
  DatriExpectation expected = DatriExpectation::unknown;
  std::string provenance;
  std::function<std::unique_ptr<MetricModel>(const Params&)> make;
  std::function<double(const Params&)> working_radius;
  std::function<std::vector<ChartPoint>(const Params&)> base_points;
  std::vector<ReferenceValue> references;

  std::string schema_help() const {
    std::ostringstream os;
    os << name << ": " << description << "\n";
    if (params.empty()) os << "    (no parameters)\n";
    for (const auto& p : params)
      os << "    --param " << p.name << "=<real>  " << p.description << " (default " << p.default_value << ", "
         << p.constraint << ")\n";
    return os.str();
  }
};

/// A registry entry bound to resolved parameters.
struct ModelInstance {
  const ModelRegistryEntry* entry = nullptr;
  Params params;
  std::unique_ptr<MetricModel> model;
  double working_radius = 0.0;
  std::vector<ChartPoint> base_points;
};

inline constexpr double kReferenceTolerance = 1e-9;

class ModelRegistry {
 public:
  void add(ModelRegistryEntry e) {
    if (find(e.name)) throw ModelError("duplicate model name: " + e.name);
    entries_.push_back(std::move(e));
  }

  const ModelRegistryEntry* find(const std::string& name) const {
    for (const auto& e : entries_)
      if (e.name == name) return &e;
    return nullptr;
  }

  const ModelRegistryEntry& at(const std::string& name) const {
    if (const auto* e = find(name)) return *e;
    throw ModelError("unknown model '" + name + "'\n" + help());
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
  }

  std::string help() const {
    std::string s = "registered models:\n";
    for (const auto& e : entries_) s += "  " + e.schema_help();
    return s;
  }

  /// Validates `overrides` against the schema, fills defaults, builds the model and
  /// checks positive definiteness at the base points and every reference value.
  ModelInstance instantiate(const std::string& name, const Params& overrides = {}) const {
    const ModelRegistryEntry& e = at(name);
    Params resolved;
    for (const auto& p : e.params) resolved[p.name] = p.default_value;
    for (const auto& [k, v] : overrides) {
      auto it = std::find_if(e.params.begin(), e.params.end(), [&](const ParamSpec& p) { return p.name == k; });
      if (it == e.params.end()) throw ModelError("model '" + name + "' has no parameter '" + k + "'\n" + e.schema_help());
      if (!std::isfinite(v) || !it->valid(v))
        throw ModelError("parameter " + k + "=" + std::to_string(v) + " violates: " + it->constraint);
      resolved[k] = v;
    }
    ModelInstance inst;
    inst.entry = &e;
    inst.params = resolved;
    inst.model = e.make(resolved);
    inst.working_radius = e.working_radius(resolved);
    inst.base_points = e.base_points(resolved);
    for (const auto& p : inst.base_points) inst.model->metric(p.coords);
    for (const auto& ref : e.references) {
      const double want = ref.expected(resolved);
      const double got = ref.computed(*inst.model, resolved);
      if (!(std::abs(got - want) <= kReferenceTolerance * std::max(1.0, std::abs(want))))
        throw ModelError("model '" + name + "' fails reference check '" + ref.description + "': expected " +
                         std::to_string(want) + ", computed " + std::to_string(got));
    }
    return inst;
  }

 private:
  std::vector<ModelRegistryEntry> entries_;
};

namespace detail {

inline ReferenceValue tau_reference(std::string what, Vec3 at, std::function<double(const Params&)> expected) {
  return {std::move(what) + " tau at (" + std::to_string(at.x()) + ", " + std::to_string(at.y()) + ", " +
              std::to_string(at.z()) + ")",
          std::move(expected),
          [at](const MetricModel& m, const Params&) { return curvature_at(m, ChartPoint(at)).tau; }};
}

inline ReferenceValue sectional_reference(std::string what, Vec3 at, Vec3 x, Vec3 y,
                                          std::function<double(const Params&)> expected) {
  return {std::move(what), std::move(expected),
          [at, x, y](const MetricModel& m, const Params&) { return sectional(m, ChartPoint(at), x, y); }};
}

inline std::vector<ChartPoint> scaled_points(double s, std::initializer_list<Vec3> pts) {
  std::vector<ChartPoint> out;
  for (const auto& p : pts) out.emplace_back(s * p);
  return out;
}

inline bool positive(double v) { return v > 0; }
inline bool negative(double v) { return v < 0; }

}  // namespace detail

/// euclidean, round_sphere, hyperbolic, product_s2xr, berger_sphere, heisenberg,
/// perturbed_conformal.
inline ModelRegistry register_builtin_models() {
  using detail::scaled_points;
  ModelRegistry reg;
  const std::string space_form_note = "constant curvature: locally symmetric, hence D'Atri";

  reg.add({"euclidean",
           "flat R^3",
           {},
           DatriExpectation::yes,
           space_form_note,
           [](const Params&) { return std::make_unique<models::Euclidean>(); },
           [](const Params&) { return 0.9; },
           [](const Params&) {
             return scaled_points(1.0, {Vec3(0, 0, 0), Vec3(0.3, -0.2, 0.1), Vec3(-0.5, 0.4, 0.7)});
           },
           {detail::tau_reference("flat", Vec3::Zero(), [](const Params&) { return 0.0; })}});

  reg.add({"round_sphere",
           "sphere of curvature kappa, stereographic chart 4/(1+kappa|x|^2)^2 delta",
           {{"kappa", 1.0, "sectional curvature", detail::positive, "kappa > 0"}},
           DatriExpectation::yes,
           space_form_note,
           [](const Params& p) { return std::make_unique<models::ConformalSpaceForm>("round_sphere", p.at("kappa")); },
           [](const Params& p) { return 0.9 / std::sqrt(p.at("kappa")); },
           [](const Params& p) {
             return scaled_points(1.0 / std::sqrt(p.at("kappa")),
                                  {Vec3(0, 0, 0), Vec3(0.2, -0.1, 0.1), Vec3(-0.3, 0.25, 0.15)});
           },
           {detail::tau_reference("6 kappa", Vec3::Zero(), [](const Params& p) { return 6.0 * p.at("kappa"); }),
            detail::sectional_reference("K(e1, e2) = kappa", Vec3(0.2, -0.1, 0.1), Vec3::UnitX(), Vec3(0.3, 1, -0.2),
                                        [](const Params& p) { return p.at("kappa"); })}});

  reg.add({"hyperbolic",
           "hyperbolic space of curvature kappa, Poincare ball chart 4/(1+kappa|x|^2)^2 delta",
           {{"kappa", -1.0, "sectional curvature", detail::negative, "kappa < 0"}},
           DatriExpectation::yes,
           space_form_note,
           [](const Params& p) { return std::make_unique<models::ConformalSpaceForm>("hyperbolic", p.at("kappa")); },
           [](const Params& p) { return 0.9 / std::sqrt(-p.at("kappa")); },
           [](const Params& p) {
             return scaled_points(1.0 / std::sqrt(-p.at("kappa")),
                                  {Vec3(0, 0, 0), Vec3(0.1, -0.05, 0.05), Vec3(-0.08, 0.1, 0.06)});
           },
           {detail::tau_reference("6 kappa", Vec3::Zero(), [](const Params& p) { return 6.0 * p.at("kappa"); }),
            detail::sectional_reference("K(e1, e3) = kappa", Vec3(0.05, 0.02, -0.04), Vec3(1, 0.2, 0),
                                        Vec3::UnitZ(), [](const Params& p) { return p.at("kappa"); })}});

  reg.add({"product_s2xr",
           "Riemannian product of the unit 2-sphere and the line",
           {},
           DatriExpectation::yes,
           "symmetric space, hence D'Atri",
           [](const Params&) { return std::make_unique<models::ProductS2xR>(); },
           [](const Params&) { return 0.9; },
           [](const Params&) {
             return scaled_points(1.0, {Vec3(0, 0, 0), Vec3(0.3, -0.2, 0.5), Vec3(-0.4, 0.3, -1.0)});
           },
           {detail::tau_reference("2", Vec3(0.3, -0.2, 0.5), [](const Params&) { return 2.0; }),
            detail::sectional_reference("K(d_x, d_y) = 1", Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(),
                                        [](const Params&) { return 1.0; }),
            detail::sectional_reference("K(d_x, d_z) = 0", Vec3::Zero(), Vec3::UnitX(), Vec3::UnitZ(),
                                        [](const Params&) { return 0.0; })}});

  reg.add({"berger_sphere",
           "unit 3-sphere with Hopf fibres scaled by lambda",
           {{"lambda", 0.8, "fibre scale", detail::positive, "lambda > 0"}},
           DatriExpectation::yes,
           "expected: yes (naturally reductive); status confirmed by the battery, not assumed",
           [](const Params& p) { return std::make_unique<models::BergerSphere>(p.at("lambda")); },
           [](const Params&) { return 0.5; },
           [](const Params&) {
             return scaled_points(1.0, {Vec3(0, 0, 0), Vec3(0.2, 0.5, -0.3), Vec3(-0.2, -0.7, 1.0)});
           },
           // left-invariant: tau = 8 - 2 lambda^2, K(fibre, horizontal) = lambda^2
           {detail::tau_reference("8 - 2 lambda^2", Vec3(0.2, 0.5, -0.3),
                                  [](const Params& p) { return 8.0 - 2.0 * p.at("lambda") * p.at("lambda"); }),
            detail::sectional_reference("K(d_x, fibre) = lambda^2", Vec3::Zero(), Vec3::UnitX(), Vec3::UnitZ(),
                                        [](const Params& p) { return p.at("lambda") * p.at("lambda"); })}});

  reg.add({"heisenberg",
           "Heisenberg group, dx^2 + dy^2 + (dz - x dy)^2",
           {},
           DatriExpectation::yes,
           "expected: yes (naturally reductive); status confirmed by the battery, not assumed",
           [](const Params&) { return std::make_unique<models::Heisenberg>(); },
           [](const Params&) { return 0.9; },
           [](const Params&) {
             return scaled_points(1.0, {Vec3(0, 0, 0), Vec3(0.5, -0.3, 0.2), Vec3(-0.7, 0.4, -0.5)});
           },
           {detail::tau_reference("-1/2", Vec3(0.5, -0.3, 0.2), [](const Params&) { return -0.5; }),
            detail::sectional_reference("K(e1, e2) = -3/4", Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(),
                                        [](const Params&) { return -0.75; }),
            detail::sectional_reference("K(e2, e3) = 1/4", Vec3(0.5, 0, 0), Vec3(0, 1, 0.5), Vec3::UnitZ(),
                                        [](const Params&) { return 0.25; })}});

  reg.add({"perturbed_conformal",
           "conformally flat e^{2f} delta, f = eps x y + cubic x^2 y",
           {{"eps", 0.1, "coefficient of x y in f"}, {"cubic", 0.1, "coefficient of x^2 y in f"}},
           DatriExpectation::no,
           "non-constant scalar curvature whenever eps or cubic is nonzero; expected: no",
           [](const Params& p) { return std::make_unique<models::PerturbedConformal>(p.at("eps"), p.at("cubic")); },
           [](const Params&) { return 0.9; },
           [](const Params&) {
             return scaled_points(1.0, {Vec3(0, 0, 0), Vec3(0.3, 0.2, 0), Vec3(-0.4, 0.5, 0.2)});
           },
           // tau = -e^{-2f} (4 lap f + 2 |grad f|^2)
           {{"closed-form conformal tau at (0.3, 0.2, 0)",
             [](const Params& p) {
               const double e = p.at("eps"), c = p.at("cubic"), x = 0.3, y = 0.2;
               const double f = e * x * y + c * x * x * y;
               const double fx = e * y + 2 * c * x * y, fy = e * x + c * x * x;
               const double lap = 2 * c * y;
               return -std::exp(-2 * f) * (4 * lap + 2 * (fx * fx + fy * fy));
             },
             [](const MetricModel& m, const Params&) { return curvature_at(m, ChartPoint(0.3, 0.2, 0)).tau; }}}});
  return reg;
}

}  // namespace datri

#endif  // DATRI_REGISTRY_HPP
