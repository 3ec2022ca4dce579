#include "cdlab/coefficients.hpp"

#include <cmath>
#include <numbers>

#include "cdlab/analytic.hpp"
#include "cdlab/diffops.hpp"

namespace cdlab {

using std::numbers::pi;

namespace {

bool slices_identical(const ScalarField& f) {
  const auto& g = f.grid();
  for (int m = 1; m <= g.steps(); ++m)
    for (std::size_t i = 0; i < g.spatial_size(); ++i)
      if (f.at(m, i) != f.at(0, i)) return false;
  return true;
}

RadialBump swirl_potential(int dim) { return {{0.5, 0.5, 0.5}, 0.45, 1.0, dim}; }
RadialBump gauge_potential(int dim) { return {{0.45, 0.55, 0.5}, 0.4, 1.0, dim}; }

Vec raw_swirl(int dim, const Vec& x) {
  const Vec g = swirl_potential(dim).gradient(x);
  return {-g[1], g[0], 0.0};
}

Vec raw_smooth(int dim, const Vec& x) {
  Vec v{1.0 + 0.5 * std::sin(2.0 * pi * x[1]), 0.5 * std::cos(pi * x[0]), 0.0};
  if (dim == 3) v[2] = 0.3 * std::sin(pi * x[2]) + 0.2 * x[0];
  return v;
}

// smooth field times a polynomial window vanishing to second order on the boundary
Vec raw_compact(int dim, const Vec& x) {
  double w = 1.0;
  for (int d = 0; d < dim; ++d) w *= 4.0 * x[d] * (1.0 - x[d]);
  return (w * w) * raw_smooth(dim, x);
}

VectorFunction scaled(VectorFunction raw, int dim, double horizon, bool time_independent, double target) {
  const double sup = reference_sup(raw, dim, horizon, time_independent);
  const double s = sup > 0.0 ? target / sup : 0.0;
  return [raw, s](double t, const Vec& x) { return s * raw(t, x); };
}

}  // namespace

CoefficientPair::CoefficientPair(VectorField A, ScalarField q)
    : A_(std::move(A)), q_(std::move(q)), div_(A_.grid()), q_tilde_(A_.grid()), q_tilde_star_(A_.grid()) {
  if (q_.grid() != A_.grid()) throw CoefficientError("convection and density live on different grids");
  if (!A_.all_finite_components() || !q_.all_finite()) throw CoefficientError("coefficients contain non-finite values");
  const double bound = grid().admissible_bound();
  const double sup = A_.sup_norm();
  if (sup > bound * (1.0 + kAdmissibleSlack))
    throw CoefficientError("convection field is not admissible: sup norm " + std::to_string(sup) + " exceeds 1/(9R) = " +
                           std::to_string(bound));
  time_independent_ = A_.time_independent() && slices_identical(q_);
  div_ = divergence(A_);
  const ScalarField a2 = squared_magnitude(A_);
  for (std::size_t i = 0; i < q_.size(); ++i) {
    q_tilde_.values()[i] = q_.values()[i] - div_.values()[i] - a2.values()[i];
    q_tilde_star_.values()[i] = q_.values()[i] + div_.values()[i] - a2.values()[i];
  }
}

double CoefficientPair::q_tilde_consistency() const {
  const ScalarField d = divergence(A_);
  const ScalarField a2 = squared_magnitude(A_);
  double worst = 0.0;
  for (std::size_t i = 0; i < q_.size(); ++i)
    worst = std::max(worst, std::abs(q_.values()[i] - d.values()[i] - a2.values()[i] - q_tilde_.values()[i]));
  return worst;
}

double reference_sup(const VectorFunction& f, int dim, double horizon, bool time_independent) {
  const int ns = dim == 2 ? 201 : 61;
  const int nt = time_independent ? 1 : 21;
  double best = 0.0;
  for (int m = 0; m < nt; ++m) {
    const double t = nt == 1 ? 0.0 : horizon * m / (nt - 1);
    const int n3 = dim == 3 ? ns : 1;
    for (int c = 0; c < n3; ++c)
      for (int b = 0; b < ns; ++b)
        for (int a = 0; a < ns; ++a) {
          const Vec x{a / (ns - 1.0), b / (ns - 1.0), dim == 3 ? c / (ns - 1.0) : 0.0};
          best = std::max(best, norm(f(t, x)));
        }
  }
  return best;
}

std::vector<std::string> convection_preset_names() {
  return {"zero", "swirl", "smooth", "gradient-bump", "at-bound", "swirl-time", "compact"};
}

std::vector<std::string> density_preset_names() { return {"zero", "smooth", "bump"}; }

ConvectionPreset convection_preset(const std::string& name, int dim, double horizon, double fraction) {
  const double bound = 1.0 / (9.0 * SpaceTimeGrid::corner_radius(dim, horizon));
  const double target = fraction * bound;
  if (name == "zero") return {name, "A = 0", [](double, const Vec&) { return Vec{0.0, 0.0, 0.0}; }, true, true};
  if (name == "swirl")
    return {name, "rotated gradient of a radial bump (divergence free, nonzero curl)",
            scaled([dim](double, const Vec& x) { return raw_swirl(dim, x); }, dim, horizon, true, target), true, true};
  if (name == "smooth")
    return {name, "trigonometric field not vanishing on the boundary",
            scaled([dim](double, const Vec& x) { return raw_smooth(dim, x); }, dim, horizon, true, target), true, false};
  if (name == "gradient-bump")
    return {name, "gradient of a radial bump (pure gauge)",
            scaled([dim](double, const Vec& x) { return gauge_potential(dim).gradient(x); }, dim, horizon, true, target),
            true, false};
  if (name == "at-bound")
    return {name, "smooth field scaled onto the admissible bound",
            scaled([dim](double, const Vec& x) { return raw_smooth(dim, x); }, dim, horizon, true, bound), true, false};
  if (name == "swirl-time")
    return {name, "swirl modulated in time",
            scaled([dim, horizon](double t, const Vec& x) {
                     return (1.0 + 0.5 * std::sin(2.0 * pi * t / horizon)) * raw_swirl(dim, x);
                   },
                   dim, horizon, false, target),
            false, true};
  if (name == "compact")
    return {name, "smooth field with a window vanishing to second order on the boundary",
            scaled([dim](double, const Vec& x) { return raw_compact(dim, x); }, dim, horizon, true, target), true, false};
  throw CoefficientError("unknown convection preset '" + name + "'");
}

DensityPreset density_preset(const std::string& name, int dim) {
  if (name == "zero") return {name, "q = 0", [](double, const Vec&) { return 0.0; }, true};
  if (name == "smooth")
    return {name, "positive trigonometric density growing in time",
            [dim](double t, const Vec& x) {
              double v = std::sin(pi * x[0]) * std::cos(pi * x[1]);
              if (dim == 3) v *= std::cos(0.5 * pi * x[2]);
              return 1.0 + 0.5 * v * (1.0 + 0.3 * t);
            },
            false};
  if (name == "bump") {
    const RadialBump b{{0.5, 0.5, 0.5}, 0.3, 2.0, dim};
    return {name, "radial bump of height 2", [b](double, const Vec& x) { return b.value(x); }, true};
  }
  throw CoefficientError("unknown density preset '" + name + "'");
}

VectorField sample_convection(const ConvectionPreset& p, const SpaceTimeGrid& g) {
  return VectorField::sample(g, p.value, p.time_independent);
}

ScalarField sample_density(const DensityPreset& p, const SpaceTimeGrid& g) {
  if (p.time_independent) return ScalarField::sample(g, [&](double, const Vec& x) { return p.value(0.0, x); });
  return ScalarField::sample(g, p.value);
}

}  // namespace cdlab
