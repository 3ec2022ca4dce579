#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cdlab/analytic.hpp"
#include "cdlab/diffops.hpp"
#include "cdlab/recovery.hpp"

using namespace cdlab;
using std::numbers::pi;

namespace {

const Vec kCenter{std::cos(0.3), std::sin(0.3), 0.0};

VectorField scaled_field(const SpaceTimeGrid& g, const std::function<Vec(const Vec&)>& f, double target) {
  VectorField raw = VectorField::sample(g, [&](double, const Vec& x) { return f(x); }, true);
  const double s = target / raw.sup_norm();
  return VectorField::sample(g, [&](double, const Vec& x) { return s * f(x); }, true);
}

// F = (-d2 psi, d1 psi) for the windowed Gaussian psi
Vec stream_of(const WindowedGaussian& psi, const Vec& x) {
  const Vec gr = psi.gradient(x);
  return {-gr[1], gr[0], 0.0};
}

double rel_l2(const ScalarField& a, const std::function<double(double, const Vec&)>& ref) {
  const auto& g = a.grid();
  double num = 0.0, den = 0.0;
  for (int m = 0; m <= g.steps(); ++m)
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
      const double w = g.time_weight(m) * g.volume_weight(i);
      const double r = ref(g.time(m), g.coord(i));
      num += w * (a.at(m, i) - r) * (a.at(m, i) - r);
      den += w * r * r;
    }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("curl matrix") {
  SpaceTimeGrid g(2, 33, 8, 1.0);
  CHECK(curl_matrix(VectorField(g, true)).max_abs() == 0.0);

  const WindowedGaussian psi;
  const VectorField F = VectorField::sample(g, [&](double, const Vec& x) { return stream_of(psi, x); }, true);
  const CurlField h = curl_matrix(F);
  double worst = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < g.spatial_size(); ++i) {
    // h_12 = d_2 F_1 - d_1 F_2 = -Lap psi
    peak = std::max(peak, std::abs(psi.laplacian(g.coord(i))));
    worst = std::max(worst, std::abs(h.at(0, i, 0, 1) + psi.laplacian(g.coord(i))));
    CHECK(h.at(0, i, 1, 0) == -h.at(0, i, 0, 1));
    CHECK(h.at(0, i, 0, 0) == 0.0);
  }
  CHECK(worst <= 0.1 * peak);

  // curl of a sampled gradient is pure stencil error, second order
  auto grad_curl = [](int N) {
    SpaceTimeGrid gg(2, N, 8, 1.0);
    const WindowedGaussian b;
    return curl_matrix(VectorField::sample(gg, [&](double, const Vec& x) { return b.gradient(x); }, true)).max_abs();
  };
  const double c33 = grad_curl(33), c65 = grad_curl(65);
  CHECK(c65 <= 0.5);
  CHECK(std::log2(c33 / c65) >= 1.9);

  SpaceTimeGrid g3(3, 17, 8, 1.0);
  const WindowedGaussian b3{{0.5, 0.5, 0.5}, 0.15, 1.0, 3};
  const CurlField h3 = curl_matrix(VectorField::sample(g3, [&](double, const Vec& x) { return b3.gradient(x); }, true));
  for (std::size_t i = 0; i < g3.spatial_size(); i += 7)
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) CHECK(h3.at(2, i, a, c) == -h3.at(2, i, c, a));
}

TEST_CASE("frequency systems") {
  const Eigen::MatrixXd I3 = frequency_rotation({0.0, 1.0, 0.0}, 3);
  CHECK((I3 - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);

  const double th = 0.05;
  const Eigen::MatrixXd A = frequency_rotation(0.0, th, 3);
  CHECK(A(0, 0) == doctest::Approx(std::cos(th)).epsilon(1e-15));
  CHECK(A(0, 1) == 0.0);
  CHECK(A(0, 2) == doctest::Approx(std::sin(th)).epsilon(1e-15));
  CHECK((A * A.transpose() - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-12);

  for (const Vec& xi : {Vec{0.3, -1.2, 0.7}, Vec{-2.0, 0.1, 0.4}, Vec{0.0, -1.0, 0.0}}) {
    const Eigen::MatrixXd R = frequency_rotation(xi, 3);
    CHECK((R * R.transpose() - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-12);
    const Eigen::Vector3d u = Eigen::Vector3d(xi[0], xi[1], xi[2]).normalized();
    CHECK((R * u - Eigen::Vector3d(0.0, 1.0, 0.0)).norm() <= 1e-12);
    for (const Vec& w : rotated_perturbations(R, {0.0, 0.1, -0.1})) CHECK(std::abs(dot(w, xi)) <= 1e-12);
  }

  // xi = e_2 seen from the cone around e_1
  DirectionCone c2{{1.0, 0.0, 0.0}, 0.2, 2, {{1.0, 0.0, 0.0}}};
  const auto s2 = build_frequency_system({0.0, 1.0, 0.0}, c2);
  REQUIRE(s2.coefficients.rows() == 1);
  CHECK(s2.coefficients(0, 0) == 1.0);
  CHECK(s2.equation_eta[0] == 1);
  CHECK(s2.determined());
  CHECK(s2.reduced_rank == 1);

  const auto s3 = build_frequency_system({0.0, 1.0, 0.0}, sample_cone({1.0, 0.0, 0.0}, 0.2, 5, 3));
  CHECK((s3.reduced - Eigen::MatrixXd{{1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}}).norm() == 0.0);
  CHECK(s3.reduced_rank == 2);
  // e_1 and the two perturbations along e_3 are orthogonal to e_2
  CHECK(s3.directions.size() == 3);
  CHECK(s3.determined());

  DirectionCone single{{1.0, 0.0, 0.0}, 0.2, 3, {{1.0, 0.0, 0.0}}};
  const auto lone = build_frequency_system({0.0, 1.0, 0.0}, single);
  CHECK(lone.rank == 2);
  CHECK_FALSE(lone.determined());

  CHECK_THROWS_WITH_AS(build_frequency_system({1.0, 0.0, 0.0}, c2), doctest::Contains("frequency outside aperture"),
                       ApertureError);
}

TEST_CASE("curl spectrum from cone data") {
  SpaceTimeGrid g(2, 65, 8, 1.0);
  const auto cone = sample_cone(kCenter, 0.2, 32, 2);
  const auto freqs = aperture_frequencies(cone, 16, pi);
  CHECK(freqs.size() == 32 * 16);

  RayData zero(g, cone, 0);
  const auto z = recover_curl_spectrum(zero, freqs);
  CHECK(z.determined_count() == freqs.size());
  double zmax = 0.0;
  for (const auto& v : z.values) zmax = std::max(zmax, std::abs(v));
  CHECK(zmax == 0.0);

  const WindowedGaussian psi;
  const double target = 0.8 * g.admissible_bound();
  const VectorField F = scaled_field(g, [&](const Vec& x) { return stream_of(psi, x); }, target);
  const auto rec = recover_curl_spectrum(transform(F, cone), freqs);
  CHECK(rec.max_ls_residual <= 1e-10);
  CHECK(rec.entry(3, 5, 1, 0) == -rec.entry(3, 5, 0, 1));
  const auto oracle = curl_spectrum_of(curl_matrix(F), freqs);
  const double err = relative_spectrum_error(rec, oracle);
  MESSAGE("stream field spectral curl error " << err);
  CHECK(err <= 5e-2);

  // independent oracle: trapezoid sums of the analytic curl -Lap psi
  const double scale = target / VectorField::sample(g, [&](double, const Vec& x) { return stream_of(psi, x); }, true).sup_norm();
  double num = 0.0, den = 0.0;
  for (std::size_t f = 0; f < freqs.size(); f += 5) {
    Complex ex{};
    for (std::size_t i = 0; i < g.spatial_size(); ++i)
      ex += g.volume_weight(i) * (-scale * psi.laplacian(g.coord(i))) * std::polar(1.0, -dot(freqs[f], g.coord(i)));
    num += std::norm(rec.at(0, f, 0) - ex);
    den += std::norm(ex);
  }
  CHECK(std::sqrt(num / den) <= 5e-2);

  const WindowedGaussian b{{0.5, 0.45, 0.5}, 0.12, 1.0, 2};
  const VectorField G = scaled_field(g, [&](const Vec& x) { return b.gradient(x); }, target);
  const auto rg = recover_curl_spectrum(transform(G, cone), freqs);
  MESSAGE("gradient/stream spectral ratio " << rg.l2_norm() / rec.l2_norm());
  CHECK(rg.l2_norm() <= 1e-4 * rec.l2_norm());
}

TEST_CASE("curl spectrum in 3D") {
  SpaceTimeGrid g(3, 33, 8, 1.0);
  const auto cone = sample_cone({0.0, 0.6, 0.8}, 0.2, 6, 3);
  const auto freqs = aperture_frequencies(cone, 6, pi);
  RayData zero(g, cone, 0);
  const auto z = recover_curl_spectrum(zero, freqs);
  CHECK(z.determined_count() == freqs.size());
  CHECK(z.l2_norm() == 0.0);

  const WindowedGaussian psi{{0.5, 0.45, 0.55}, 0.15, 1.0, 3};
  // curl of (0, 0, psi), divergence free
  const VectorField F = scaled_field(
      g, [&](const Vec& x) { const Vec gr = psi.gradient(x); return Vec{gr[1], -gr[0], 0.0}; }, 0.8 * g.admissible_bound());
  const auto rec = recover_curl_spectrum(transform(F, cone), freqs);
  const double err = relative_spectrum_error(rec, curl_spectrum_of(curl_matrix(F), freqs));
  MESSAGE("3D spectral curl error " << err);
  CHECK(err <= 5e-2);
}

TEST_CASE("Poincare potential") {
  auto run = [](int N) {
    SpaceTimeGrid g(2, N, 8, 1.0);
    const WindowedGaussian b{{0.5, 0.45, 0.5}, 0.12, 1.0, 2};
    const VectorField F = VectorField::sample(g, [&](double, const Vec& x) { return b.gradient(x); }, true);
    const auto P = poincare_potential(F, 1.0);
    return std::pair{P, rel_l2(P.phi, [&](double, const Vec& x) { return b.value(x); })};
  };
  const auto [p33, e33] = run(33);
  const auto [p65, e65] = run(65);
  CHECK(e65 <= 5e-3);
  CHECK(std::log2(e33 / e65) >= 1.9);
  CHECK(std::log2(p33.path_residual / p65.path_residual) >= 1.9);
  CHECK(p65.path_residual <= 5e-3);
  CHECK(p65.boundary_zero);
  CHECK(p65.phi.at(0, p65.anchor) == 0.0);

  SpaceTimeGrid g(2, 33, 8, 1.0);
  const auto P0 = poincare_potential(VectorField(g, true));
  CHECK(P0.phi.max_abs() == 0.0);

  const VectorField swirl = sample_convection(convection_preset("swirl", 2, 1.0), g);
  CHECK_THROWS_WITH_AS(poincare_potential(swirl), doctest::Contains("not curl free"), CurlTooLargeError);
}

TEST_CASE("Dirichlet potential and the divergence-free certificate") {
  SpaceTimeGrid g(2, 65, 8, 1.0);
  const WindowedGaussian b{{0.5, 0.45, 0.5}, 0.12, 1.0, 2};
  const VectorField G = VectorField::sample(g, [&](double, const Vec& x) { return b.gradient(x); }, true);
  CHECK(rel_l2(dirichlet_potential(G), [&](double, const Vec& x) { return b.value(x); }) <= 1e-2);

  const auto zero = divergence_matched_recovery(VectorField(g, true));
  CHECK(zero.certified);
  CHECK(zero.recovered.sup_norm() == 0.0);

  const auto fired = divergence_matched_recovery(G);
  CHECK_FALSE(fired.certified);
  CHECK(fired.diagnosis.find("divergence-free hypothesis violated") != std::string::npos);

  // the same divergence-free field sampled analytically and through finite differences
  const WindowedGaussian psi;
  const double target = 0.8 * g.admissible_bound();
  const VectorField A1 = scaled_field(g, [&](const Vec& x) { return stream_of(psi, x); }, target);
  const double s = target / VectorField::sample(g, [&](double, const Vec& x) { return stream_of(psi, x); }, true).sup_norm();
  const VectorField gp = gradient(ScalarField::sample(g, [&](double, const Vec& x) { return s * psi.value(x); }));
  VectorField A2(g, true);
  A2.component(0) = -1.0 * gp.component(1);
  A2.component(1) = gp.component(0);
  VectorField diff = A1;
  diff -= A2;
  CHECK(diff.sup_norm() > 0.0);
  const auto cert = divergence_matched_recovery(diff);
  CHECK(cert.certified);
  CHECK(cert.phi_max <= cert.phi_bound);
  CHECK(cert.recovered.sup_norm() <= 5e-2 * A1.sup_norm());
}

TEST_CASE("q recovery on aperture frequencies") {
  SpaceTimeGrid g(2, 33, 8, 1.0);
  const double eps = 0.2;
  CHECK(frequency_in_aperture({0.0, 0.0, 0.0}, kCenter, eps));
  CHECK_FALSE(frequency_in_aperture(kCenter, kCenter, eps));

  const auto z = recover_q(q_fourier_data(ScalarField(g), kCenter, eps));
  CHECK(z.q.max_abs() == 0.0);

  const Vec xi{-2.0 * pi, 6.0 * pi, 0.0};
  REQUIRE(frequency_in_aperture(xi, kCenter, eps));
  auto mode = [&](double t, const Vec& x) { return std::cos(dot(xi, x) + 4.0 * pi * t); };
  const ScalarField qm = ScalarField::sample(g, mode);
  const auto rm = recover_q(q_fourier_data(qm, kCenter, eps));
  double merr = 0.0;
  for (std::size_t i = 0; i < qm.values().size(); ++i) merr = std::max(merr, std::abs(rm.q.values()[i] - qm.values()[i]));
  CHECK(merr <= 1e-10);

  // linearity
  const ScalarField qb = sample_density(density_preset("bump", 2), g);
  const auto r1 = recover_q(q_fourier_data(qb, kCenter, eps));
  const auto r2 = recover_q(q_fourier_data(2.0 * qb + qm, kCenter, eps));
  double lin = 0.0;
  for (std::size_t i = 0; i < qb.values().size(); ++i)
    lin = std::max(lin, std::abs(r2.q.values()[i] - 2.0 * r1.q.values()[i] - rm.q.values()[i]));
  CHECK(lin <= 1e-12);

  // oracle: covered part of the bump by direct space-time DFT sums
  const int P = g.nodes() - 1, M = g.steps();
  const double norm = 1.0 / std::sqrt(double(P) * P * M);
  std::vector<double> proj(static_cast<std::size_t>(P) * P * M, 0.0);
  auto sidx = [](int j, int e) { return j <= e / 2 ? j : j - e; };
  for (int kt = 0; kt < M; ++kt)
    for (int ky = 0; ky < P; ++ky)
      for (int kx = 0; kx < P; ++kx) {
        const Vec k{2.0 * pi * sidx(kx, P), 2.0 * pi * sidx(ky, P), 0.0};
        if (!frequency_in_aperture(k, kCenter, eps)) continue;
        const double tau = 2.0 * pi * sidx(kt, M);
        Complex c{};
        for (int m = 0; m < M; ++m)
          for (int y = 0; y < P; ++y)
            for (int x = 0; x < P; ++x)
              c += qb.at(m, g.flat({x, y, 0})) *
                   std::polar(1.0, -(k[0] * x * g.h() + k[1] * y * g.h() + tau * g.time(m)));
        c *= norm;
        for (int m = 0; m < M; ++m)
          for (int y = 0; y < P; ++y)
            for (int x = 0; x < P; ++x)
              proj[(static_cast<std::size_t>(m) * P + y) * P + x] +=
                  (c * std::polar(1.0, k[0] * x * g.h() + k[1] * y * g.h() + tau * g.time(m))).real() * norm;
      }
  double num = 0.0, den = 0.0;
  for (int m = 0; m < M; ++m)
    for (int y = 0; y < P; ++y)
      for (int x = 0; x < P; ++x) {
        const double o = proj[(static_cast<std::size_t>(m) * P + y) * P + x];
        num += (r1.q.at(m, g.flat({x, y, 0})) - o) * (r1.q.at(m, g.flat({x, y, 0})) - o);
        den += o * o;
      }
  CHECK(den > 0.0);
  CHECK(std::sqrt(num / den) <= 5e-2);

  CHECK(r1.aperture_fraction > 0.05);
  CHECK(r1.aperture_fraction < 0.2);
  const auto banded = recover_q(q_fourier_data(qb, kCenter, eps), 2);
  CHECK_FALSE(banded.band_covered);
  CHECK_FALSE(banded.uncovered_band.empty());
  CHECK(recover_q(q_fourier_data(qb, kCenter, eps), 0).band_covered);
}

TEST_CASE("remainder bound scaling") {
  CHECK(fitted_exponent({1.0, 2.0, 4.0}, {3.0, 3.0 * std::sqrt(2.0), 6.0}) == doctest::Approx(0.5).epsilon(1e-12));

  SpaceTimeGrid g(2, 33, 32, 1.0);
  const CoefficientPair c1(sample_convection(convection_preset("compact", 2, 1.0, 0.8), g),
                           sample_density(density_preset("smooth", 2), g));
  const CoefficientPair c2(sample_convection(convection_preset("compact", 2, 1.0, 0.4), g),
                           sample_density(density_preset("bump", 2), g));
  const auto rep = remainder_bound_experiment(c1, c2, kCenter, 0.2, {8.0, 16.0, 32.0, 64.0});
  FaceSet plus_x = FaceSet::none();
  plus_x.insert(1);
  CHECK(rep.faces == plus_x);
  MESSAGE("boundary term exponent " << rep.exponent);
  CHECK(rep.passed);
  CHECK(rep.exponent <= 0.7);
  for (const auto& r : rep.rows) CHECK(std::isfinite(std::abs(r.boundary_term)));
  CHECK_THROWS_WITH(remainder_bound_experiment(c1, c2, kCenter, 0.2, {16.0, 16.0}), doctest::Contains("non-monotone"));
}
