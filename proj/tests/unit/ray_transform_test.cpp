#include <doctest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "cdlab/coefficients.hpp"
#include "cdlab/quadrature.hpp"
#include "cdlab/ray_transform.hpp"

using namespace cdlab;

namespace {

// F = s (-d2 psi, d1 psi), psi = (x1(1-x1) x2(1-x2))^3 exp(-|x-c|^2 / (2 sigma^2))
struct StreamField {
  double scale = 1.0;
  Vec c{0.45, 0.55, 0.0};
  double s2 = 0.15 * 0.15;

  Vec operator()(const Vec& x) const {
    const double w0 = x[0] * (1.0 - x[0]), w1 = x[1] * (1.0 - x[1]);
    const double G = std::exp(-((x[0] - c[0]) * (x[0] - c[0]) + (x[1] - c[1]) * (x[1] - c[1])) / (2.0 * s2));
    const double W = std::pow(w0 * w1, 3);
    const double d0 = 3.0 * w0 * w0 * (1.0 - 2.0 * x[0]) * std::pow(w1, 3) * G - W * G * (x[0] - c[0]) / s2;
    const double d1 = 3.0 * w1 * w1 * (1.0 - 2.0 * x[1]) * std::pow(w0, 3) * G - W * G * (x[1] - c[1]) / s2;
    return {-scale * d1, scale * d0, 0.0};
  }
};

double dense_line_integral(const std::function<double(double)>& f, double a, double b) {
  const GaussRule g = gauss_legendre(6);
  const int panels = 2000;
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p)
    for (std::size_t i = 0; i < g.nodes.size(); ++i) s += h * g.weights[i] * f(a + (p + g.nodes[i]) * h);
  return s;
}

VectorField stream_field(const SpaceTimeGrid& g, double target_sup) {
  StreamField raw;
  const double sup = reference_sup([raw](double, const Vec& x) { return raw(x); }, 2, g.horizon(), true);
  StreamField f;
  f.scale = target_sup / sup;
  return VectorField::sample(g, [f](double, const Vec& x) { return f(x); }, true);
}

}  // namespace

TEST_CASE("cone sampling") {
  const Vec e1{1.0, 0.0, 0.0};
  const auto one = sample_cone(e1, 0.2, 1, 2);
  REQUIRE(one.directions.size() == 1);
  CHECK(one.directions[0] == e1);

  CHECK(perturbed_direction(e1, 3, 0.0, 1) == e1);
  const Vec p = perturbed_direction(e1, 3, 0.1, 1);
  CHECK(p[0] == doctest::Approx(std::cos(0.1)).epsilon(1e-15));
  CHECK(p[2] == doctest::Approx(std::sin(0.1)).epsilon(1e-15));
  CHECK(p[1] == 0.0);

  for (int dim : {2, 3}) {
    const double c = std::cos(0.7), s = std::sin(0.7);
    const Vec w0 = dim == 2 ? Vec{c, s, 0.0} : Vec{c * 0.6, s, c * 0.8};
    const auto cone = sample_cone(w0, 0.2, 64, dim);
    CHECK(cone.directions.size() == 64);
    CHECK(cone.directions[0] == w0);
    for (std::size_t i = 0; i < cone.directions.size(); ++i) {
      const Vec& w = cone.directions[i];
      CHECK(std::abs(norm(w) - 1.0) <= 1e-14);
      CHECK(norm(w - w0) <= 0.2 + 1e-14);
      for (std::size_t j = 0; j < i; ++j) CHECK(norm(w - cone.directions[j]) > 1e-6);
    }
    // the perturbation family sits on the rim of the cap
    for (int k = 1; k <= 2 * (dim - 1); ++k) CHECK(norm(cone.directions[k] - w0) == doctest::Approx(0.2).epsilon(1e-12));
    const auto again = sample_cone(w0, 0.2, 64, dim);
    CHECK(again.directions == cone.directions);
    const auto frame = orthonormal_complement(w0, dim);
    CHECK(frame.size() == static_cast<std::size_t>(dim - 1));
    for (const Vec& f : frame) {
      CHECK(std::abs(dot(f, w0)) <= 1e-15);
      CHECK(norm(f) == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
  CHECK_THROWS(sample_cone(e1, 0.0, 4, 2));
  CHECK_THROWS(sample_cone(e1, 0.5, 4, 2));
}

TEST_CASE("ray data lattice covers the box shadow") {
  SpaceTimeGrid g(3, 9, 8, 1.0);
  const auto cone = sample_cone({0.0, 0.6, 0.8}, 0.1, 5, 3);
  RayData r(g, cone, 0);
  CHECK(r.plane_nodes() == 9);
  CHECK(r.plane_size() == 81);
  for (std::size_t d = 0; d < cone.directions.size(); ++d)
    for (int corner = 0; corner < 8; ++corner) {
      const Vec x{double(corner & 1) - 0.5, double((corner >> 1) & 1) - 0.5, double((corner >> 2) & 1) - 0.5};
      for (const Vec& f : r.frame(d)) CHECK(std::abs(dot(x, f)) <= r.half_width());
    }
}

TEST_CASE("transform of zero, gradient and stream fields") {
  SpaceTimeGrid g(2, 129, 8, 1.0);
  const auto cone = sample_cone({std::cos(0.4), std::sin(0.4), 0.0}, 0.2, 8, 2);
  CHECK(transform(VectorField(g, true), cone).max_abs() == 0.0);

  const auto grad = sample_convection(convection_preset("gradient-bump", 2, g.horizon()), g);
  CHECK(transform(grad, cone).max_abs() <= 1e-6);

  const VectorField F = stream_field(g, 0.8 * g.admissible_bound());
  const RayData r = transform(F, cone);
  StreamField exact;
  {
    const StreamField raw;
    exact.scale = 0.8 * g.admissible_bound() / reference_sup([raw](double, const Vec& x) { return raw(x); }, 2, 1.0, true);
  }
  double worst = 0.0, biggest = 0.0;
  for (std::size_t d = 0; d < cone.directions.size(); ++d)
    for (std::size_t j = 0; j < r.plane_size(); ++j) {
      const Vec x = r.base_point(d, j), w = cone.directions[d];
      double lo, hi, oracle = 0.0;
      if (box_chord(2, x, w, RayRange::FullLine, lo, hi))
        oracle = dense_line_integral([&](double s) { return dot(w, exact(x + s * w)); }, lo, hi);
      worst = std::max(worst, std::abs(oracle - r.at(3, d, j)));
      biggest = std::max(biggest, std::abs(oracle));
    }
  MESSAGE("stream field: max |IF| " << biggest << ", deviation from dense quadrature " << worst);
  CHECK(biggest > 1e-3);
  CHECK(worst <= 1e-7);
}

TEST_CASE("linearity and shift covariance") {
  SpaceTimeGrid g(2, 33, 8, 1.0);
  const auto cone = sample_cone({1.0, 0.0, 0.0}, 0.3, 6, 2);
  const auto F = sample_convection(convection_preset("swirl-time", 2, g.horizon()), g);
  const auto G = sample_convection(convection_preset("smooth", 2, g.horizon()), g);
  const double a = 0.7, b = -1.3;
  VectorField comb = a * F;
  comb += b * G;
  const RayData rf = transform(F, cone), rg = transform(G, cone), rc = transform(comb, cone);
  double worst = 0.0;
  for (std::size_t i = 0; i < rc.values().size(); ++i)
    worst = std::max(worst, std::abs(rc.values()[i] - a * rf.values()[i] - b * rg.values()[i]));
  CHECK(worst <= 1e-12);

  double shift = 0.0;
  for (std::size_t d = 0; d < cone.directions.size(); ++d)
    for (std::size_t j = 0; j < rf.plane_size(); j += 3) {
      const Vec w = cone.directions[d];
      const Vec moved = rf.base_point(d, j) + 0.37 * w;
      shift = std::max(shift, std::abs(ray_quadrature(F, 5, moved, w, RayRange::FullLine) - rf.at(5, d, j)));
    }
  CHECK(shift <= 1e-12);
}

TEST_CASE("attenuated moments") {
  SpaceTimeGrid g(2, 33, 8, 1.0);
  const auto cone = sample_cone({std::cos(1.0), std::sin(1.0), 0.0}, 0.2, 6, 2);
  const auto zero = attenuated_moment(VectorField(g, true), cone);
  CHECK(zero.data.max_abs() == 0.0);
  CHECK(zero.flagged == 0);

  const auto small = sample_convection(convection_preset("swirl", 2, g.horizon(), 1e-3 / g.admissible_bound()), g);
  REQUIRE(small.sup_norm() <= 1.0001e-3);
  const RayData lin = transform(small, cone);
  const auto att = attenuated_moment(small, cone);
  double taylor = 0.0, round = 0.0;
  const RayData back = linear_from_attenuated(att.data);
  for (std::size_t i = 0; i < lin.values().size(); ++i) {
    const double x = lin.values()[i];
    taylor = std::max(taylor, std::abs(att.data.values()[i] - (x - 0.5 * x * x)));
    round = std::max(round, std::abs(back.values()[i] - x));
  }
  CHECK(taylor <= 1e-9);
  CHECK(round <= 1e-10);

  // weak-field agreement is second order in the amplitude
  auto gap = [&](double amp) {
    const auto A = sample_convection(convection_preset("swirl", 2, g.horizon(), amp), g);
    const RayData l = transform(A, cone);
    const auto at = attenuate(l);
    double m = 0.0;
    for (std::size_t i = 0; i < l.values().size(); ++i) m = std::max(m, std::abs(at.data.values()[i] - l.values()[i]));
    return m;
  };
  CHECK(gap(0.4) / gap(0.2) == doctest::Approx(4.0).epsilon(0.02));

  RayData strong = lin;
  for (double& v : strong.values()) v = -1.0;
  CHECK(attenuate(strong).flagged == strong.values().size());
  RayData bad = lin;
  bad.values()[0] = 1.5;
  CHECK_THROWS_AS(linear_from_attenuated(bad), std::domain_error);

  std::ostringstream os;
  write_ray_csv(os, zero.data);
  CHECK(os.str().rfind("t,omega,k,value\n", 0) == 0);
}
