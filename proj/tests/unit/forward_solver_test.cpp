#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "cdlab/analytic.hpp"
#include "cdlab/diffops.hpp"
#include "cdlab/forward.hpp"

using namespace cdlab;
using std::numbers::pi;

namespace {

CoefficientPair pair_from(const SpaceTimeGrid& g, const std::string& a, const std::string& q, double fraction = 0.8) {
  return CoefficientPair(sample_convection(convection_preset(a, g.dim(), g.horizon(), fraction), g),
                         sample_density(density_preset(q, g.dim()), g));
}

BoundaryTrace smooth_trace(const SpaceTimeGrid& g) {
  const double T = g.horizon();
  return BoundaryTrace::from_function(g, FaceSet::all(g.dim()), "sigma", [T](double t, const Vec& x) {
    const double s = std::sin(pi * t / T);
    return s * s * (1.0 + 0.5 * x[0] - 0.3 * x[1] * x[1]);
  });
}

// restriction of a fine-grid field to the nodes of a coarser one
double relative_difference(const ScalarField& coarse, const ScalarField& fine) {
  const auto& gc = coarse.grid();
  const auto& gf = fine.grid();
  const int rs = (gf.nodes() - 1) / (gc.nodes() - 1), rt = gf.steps() / gc.steps();
  ScalarField r(gc);
  for (int m = 0; m <= gc.steps(); ++m)
    for (std::size_t i = 0; i < gc.spatial_size(); ++i) {
      Index3 idx = gc.unflat(i);
      for (int d = 0; d < gc.dim(); ++d) idx[d] *= rs;
      r.at(m, i) = fine.at(m * rt, gf.flat(idx));
    }
  return l2_norm(coarse - r) / l2_norm(r);
}

}  // namespace

TEST_CASE("coefficient pairs") {
  SpaceTimeGrid g(2, 17, 16, 1.0);
  auto c = pair_from(g, "swirl", "smooth");
  CHECK(c.q_tilde_consistency() <= 1e-12);
  CHECK(c.convection().sup_norm() <= g.admissible_bound());
  auto big = 2.0 * sample_convection(convection_preset("smooth", 2, 1.0), g);
  CHECK_THROWS_AS(CoefficientPair(big, ScalarField(g)), CoefficientError);
  CHECK_NOTHROW(pair_from(g, "at-bound", "zero"));
  for (const auto& n : convection_preset_names()) CHECK_NOTHROW(pair_from(g, n, "zero"));
  // q_tilde_star - q_tilde = 2 div A
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    worst = std::max(worst, std::abs(c.q_tilde_star().values()[i] - c.q_tilde().values()[i] -
                                     2.0 * c.divergence_of_convection().values()[i]));
  CHECK(worst <= 1e-14);
}

TEST_CASE("zero data gives the zero solution") {
  SpaceTimeGrid g(2, 17, 16, 1.0);
  auto c = pair_from(g, "swirl", "bump");
  StepperStats st;
  auto u = solve_ibvp(c, BoundaryTrace::zero(g), nullptr, TimeDirection::Forward, &st);
  CHECK(u.max_abs() <= 1e-12);
  CHECK(st.factorizations == 1);
  auto v = solve_ibvp(c, BoundaryTrace::zero(g), nullptr, TimeDirection::Adjoint);
  CHECK(v.max_abs() <= 1e-12);
}

TEST_CASE("incompatible boundary data is rejected") {
  SpaceTimeGrid g(2, 9, 8, 1.0);
  auto c = pair_from(g, "zero", "zero");
  auto f = BoundaryTrace::from_function(g, FaceSet::all(2), "sigma", [](double, const Vec&) { return 1.0; });
  CHECK_THROWS_AS(solve_ibvp(c, f), SolverError);
  auto partial = BoundaryTrace(g, FaceSet::none(), "empty");
  CHECK_THROWS_AS(solve_ibvp(c, partial), SolverError);
}

TEST_CASE("manufactured solution converges at second order in h and k") {
  auto exact = [](double t, const Vec& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]) * (1.0 - std::exp(-t)); };
  auto forcing = [](double t, const Vec& x) {
    return std::sin(pi * x[0]) * std::sin(pi * x[1]) * (std::exp(-t) + 2.0 * pi * pi * (1.0 - std::exp(-t)));
  };
  double errs[3];
  int ns[3] = {17, 33, 65};
  for (int k = 0; k < 3; ++k) {
    SpaceTimeGrid g(2, ns[k], ns[k] - 1, 1.0);
    auto c = pair_from(g, "zero", "zero");
    auto src = ScalarField::sample(g, forcing);
    StepperStats st;
    auto u = solve_ibvp(c, BoundaryTrace::zero(g), &src, TimeDirection::Forward, &st);
    errs[k] = l2_norm(u - ScalarField::sample(g, exact));
    CHECK(st.max_linear_residual <= 1e-10);
  }
  MESSAGE("manufactured errors " << errs[0] << " " << errs[1] << " " << errs[2]);
  CHECK(std::log2(errs[0] / errs[1]) >= 1.9);
  CHECK(std::log2(errs[1] / errs[2]) >= 1.9);
}

TEST_CASE("manufactured solution with convection and density") {
  // A = a (1, x_1), q = 1 + x_2: div A = 0, |A|^2 = a^2 (1 + x_1^2)
  const double a = 0.04;
  auto exact = [](double t, const Vec& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]) * t * t; };
  auto forcing = [a](double t, const Vec& x) {
    const double s0 = std::sin(pi * x[0]), s1 = std::sin(pi * x[1]);
    const double c0 = std::cos(pi * x[0]), c1 = std::cos(pi * x[1]);
    const double u = s0 * s1 * t * t;
    const double ut = 2.0 * t * s0 * s1;
    const double lap = -2.0 * pi * pi * u;
    const double adotgrad = a * (pi * c0 * s1 + x[0] * pi * s0 * c1) * t * t;
    const double qt = 1.0 + x[1] - a * a * (1.0 + x[0] * x[0]);
    return ut - lap - 2.0 * adotgrad + qt * u;
  };
  double errs[2];
  int ns[2] = {17, 33};
  for (int k = 0; k < 2; ++k) {
    SpaceTimeGrid g(2, ns[k], ns[k] - 1, 1.0);
    auto A = VectorField::sample(g, [a](double, const Vec& x) { return Vec{a, a * x[0], 0.0}; }, true);
    CoefficientPair c(A, ScalarField::sample(g, [](double, const Vec& x) { return 1.0 + x[1]; }));
    auto src = ScalarField::sample(g, forcing);
    auto u = solve_ibvp(c, BoundaryTrace::zero(g), &src);
    errs[k] = l2_norm(u - ScalarField::sample(g, exact));
  }
  CHECK(std::log2(errs[0] / errs[1]) >= 1.9);
}

TEST_CASE("coarse solution agrees with a fine-grid solve") {
  SpaceTimeGrid gc(2, 33, 32, 1.0), gf(2, 129, 128, 1.0);
  auto uc = solve_ibvp(pair_from(gc, "smooth", "bump"), smooth_trace(gc));
  auto uf = solve_ibvp(pair_from(gf, "smooth", "bump"), smooth_trace(gf));
  const double rel = relative_difference(uc, uf);
  MESSAGE("coarse/fine relative difference " << rel);
  CHECK(rel <= 2e-2);
}

TEST_CASE("adjoint solve satisfies the backward problem") {
  SpaceTimeGrid g(2, 17, 16, 1.0);
  auto c = pair_from(g, "swirl-time", "smooth");
  auto f = BoundaryTrace::from_function(g, FaceSet::all(2), "sigma", [](double t, const Vec& x) {
    return (1.0 - t) * (1.0 - t) * t * (0.5 + x[0]);
  });
  auto v = solve_ibvp(c, f, nullptr, TimeDirection::Adjoint);
  double last = 0.0;
  for (std::size_t i = 0; i < g.spatial_size(); ++i) last = std::max(last, std::abs(v.at(g.steps(), i)));
  CHECK(last == 0.0);
  // residual of -d_t v - Lap v + 2A.grad v + q_tilde_star v in reversed time
  auto res = cn_residual(operator_coefficients(c, TimeDirection::Adjoint), reverse_time(to_complex(v)));
  double worst = 0.0;
  for (auto z : res.values) worst = std::max(worst, std::abs(z));
  CHECK(worst <= 1e-9);
}

TEST_CASE("Green identity for the forward and adjoint operators") {
  // u vanishes on the lateral boundary and at t = 0, v on the boundary and at t = T
  auto u_fn = [](double t, const Vec& x) { return t * std::sin(pi * x[0]) * std::sin(pi * x[1]) * (1.0 + x[0]); };
  auto v_fn = [](double t, const Vec& x) { return (1.0 - t) * std::sin(pi * x[0]) * x[1] * (1.0 - x[1]); };
  double mism[2];
  int ns[2] = {17, 33};
  for (int k = 0; k < 2; ++k) {
    SpaceTimeGrid g(2, ns[k], ns[k] - 1, 1.0);
    // each component varies along its own axis, so the centered product rule is inexact
    auto A = VectorField::sample(g, [](double t, const Vec& x) {
      return Vec{0.02 * x[0] * x[1] * (1.0 + t), 0.02 * std::sin(2.0 * x[1] + x[0]), 0.0};
    }, false);
    CoefficientPair c(A, sample_density(density_preset("smooth", 2), g));
    auto u = ComplexField::sample(g, [&](double t, const Vec& x) { return Complex(u_fn(t, x)); });
    auto v = ComplexField::sample(g, [&](double t, const Vec& x) { return Complex(v_fn(t, x)); });
    auto Lu = cn_residual(operator_coefficients(c, TimeDirection::Forward), u);
    auto Lv = reverse_time(cn_residual(operator_coefficients(c, TimeDirection::Adjoint), reverse_time(v)));
    auto uh = half_step_average(u), vh = half_step_average(v);
    Complex lhs{}, rhs{};
    const double w = g.k() * g.h() * g.h();
    for (std::size_t j = 0; j < Lu.values.size(); ++j) {
      lhs += w * Lu.values[j] * std::conj(vh.values[j]);
      rhs += w * uh.values[j] * std::conj(Lv.values[j]);
    }
    mism[k] = std::abs(lhs - rhs) / (l2_norm(u) * l2_norm(v));
  }
  MESSAGE("pairing mismatch " << mism[0] << " " << mism[1]);
  CHECK(mism[1] <= mism[0] / 3.0);
  CHECK(mism[1] <= 10.0 / (32.0 * 32.0));
}

TEST_CASE("discrete maximum principle smoke test") {
  SpaceTimeGrid g(2, 33, 32, 1.0);
  auto c = pair_from(g, "zero", "smooth");
  for (double v : c.density().values()) REQUIRE(v >= 0.0);
  auto f = BoundaryTrace::from_function(g, FaceSet::all(2), "sigma", [](double t, const Vec& x) {
    return std::sin(pi * t) * std::sin(pi * t) * (1.0 + x[0] * x[1]);
  });
  auto u = solve_ibvp(c, f);
  double lowest = 0.0;
  for (double v : u.values()) lowest = std::min(lowest, v);
  CHECK(lowest >= -10.0 * g.h() * g.h());
}

TEST_CASE("DN output of injected fields") {
  SpaceTimeGrid g(2, 9, 8, 1.0);
  auto c = pair_from(g, "zero", "zero");
  CHECK(dn_output(c, ScalarField(g)).max_abs() == 0.0);
  auto u = ScalarField::sample(g, [](double, const Vec& x) { return x[0]; });
  auto tr = dn_output(c, u);
  for (int m = 0; m <= g.steps(); ++m)
    for (std::size_t k = 0; k < tr.samples().size(); ++k) {
      const int face = tr.samples()[k].face;
      const double expected = face == 0 ? -1.0 : face == 1 ? 1.0 : 0.0;
      CHECK(std::abs(tr.at(m, k) - expected) <= 1e-12);
    }
  // 2 (nu . A) u term with constant A and u = 1
  auto A = VectorField::sample(g, [&](double, const Vec&) { return Vec{0.01, -0.02, 0.0}; }, true);
  CoefficientPair ca(A, ScalarField(g));
  auto one = ScalarField::sample(g, [](double, const Vec&) { return 1.0; });
  auto t1 = dn_output(ca, one);
  for (std::size_t k = 0; k < t1.samples().size(); ++k) {
    const int face = t1.samples()[k].face;
    const double expected = face == 0 ? -0.02 : face == 1 ? 0.02 : face == 2 ? 0.04 : -0.04;
    CHECK(std::abs(t1.at(3, k) - expected) <= 1e-14);
  }
  std::ostringstream os;
  write_trace_csv(os, tr);
  CHECK(os.str().rfind("t,face,x1,x2,value\n", 0) == 0);
}

TEST_CASE("gauge transformed coefficients give matching DN traces") {
  const RadialBump phi{{0.45, 0.55, 0.0}, 0.4, 1.0, 2};
  double rel[2];
  int ns[2] = {33, 65};
  for (int k = 0; k < 2; ++k) {
    SpaceTimeGrid g(2, ns[k], ns[k] - 1, 1.0);
    auto base = convection_preset("swirl", 2, 1.0, 0.5);
    auto gauge = convection_preset("gradient-bump", 2, 1.0, 0.4);
    auto A1 = sample_convection(base, g);
    auto A2 = A1 + sample_convection(gauge, g);
    auto q = sample_density(density_preset("smooth", 2), g);
    CoefficientPair c1(A1, q), c2(A2, q);
    auto f = smooth_trace(g);
    auto t1 = dn_output(c1, solve_ibvp(c1, f));
    auto t2 = dn_output(c2, solve_ibvp(c2, f));
    rel[k] = (t1 - t2).l2_norm() / t1.l2_norm();
    // G-restricted difference through the public entry point
    BoundaryRegion G(2, RegionKind::NeighborhoodG, {1.0, 0.0, 0.0}, 0.1);
    CHECK(dn_difference_on_G(c1, c2, f, G).l2_norm() <= (t1 - t2).l2_norm() + 1e-15);
    CHECK(dn_difference_on_G(c1, c1, f, G).max_abs() == 0.0);
  }
  MESSAGE("gauge relative differences " << rel[0] << " " << rel[1]);
  CHECK(rel[1] <= 5e-2);
  CHECK(std::log2(rel[0] / rel[1]) >= 1.0);
}

TEST_CASE("non-gradient convection change stays visible in the data") {
  double nrm[2];
  int ns[2] = {17, 33};
  for (int k = 0; k < 2; ++k) {
    SpaceTimeGrid g(2, ns[k], ns[k] - 1, 1.0);
    auto q = sample_density(density_preset("smooth", 2), g);
    CoefficientPair c1(sample_convection(convection_preset("zero", 2, 1.0), g), q);
    CoefficientPair c2(sample_convection(convection_preset("smooth", 2, 1.0), g), q);
    BoundaryRegion G(2, RegionKind::NeighborhoodG, {1.0, 0.0, 0.0}, 0.1);
    nrm[k] = dn_difference_on_G(c1, c2, smooth_trace(g), G).l2_norm();
  }
  MESSAGE("distinguishable data norms " << nrm[0] << " " << nrm[1]);
  CHECK(nrm[1] >= 0.5 * nrm[0]);
  CHECK(nrm[1] > 1e-3);
}
