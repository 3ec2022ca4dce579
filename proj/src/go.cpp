#include "cdlab/go.hpp"

#include <cmath>
#include <stdexcept>

#include "cdlab/diffops.hpp"

namespace cdlab {

namespace {

TimeDirection direction_of(GOKind kind) { return kind == GOKind::Growing ? TimeDirection::Forward : TimeDirection::Adjoint; }

// Stepper-time view: decaying problems run in reversed time.
ComplexField to_stepper_time(GOKind kind, const ComplexField& f) { return kind == GOKind::Growing ? f : reverse_time(f); }

}  // namespace

CarlemanWeight::CarlemanWeight(double lambda, const Vec& omega, int dim) : lambda_(lambda), omega_(omega), dim_(dim) {
  if (!(lambda > 0.0)) throw std::invalid_argument("Carleman weight needs lambda > 0");
  for (int d = dim; d < 3; ++d)
    if (omega[d] != 0.0) throw std::invalid_argument("direction has components beyond the spatial dimension");
  if (std::abs(norm(omega) - 1.0) > 1e-14) throw std::invalid_argument("direction must be a unit vector");
}

std::string to_string(GOKind kind) { return kind == GOKind::Growing ? "growing" : "decaying"; }

ScalarField ray_exponent(const VectorField& A, const Vec& omega, Interpolation kind) {
  const auto& g = A.grid();
  ScalarField psi(g);
  const int levels = A.time_independent() ? 1 : g.steps() + 1;
  for (int m = 0; m < levels; ++m) {
    auto s = psi.slice(m);
    for (std::size_t i = 0; i < g.spatial_size(); ++i) s[i] = ray_quadrature(A, m, g.coord(i), omega, RayRange::HalfLine, kind);
  }
  if (A.time_independent())
    for (int m = 1; m <= g.steps(); ++m) std::copy(psi.slice(0).begin(), psi.slice(0).end(), psi.slice(m).begin());
  return psi;
}

ScalarField transport_factor(const VectorField& A, const Vec& omega, GOKind kind) {
  ScalarField e = ray_exponent(A, omega);
  const double sign = kind == GOKind::Growing ? 1.0 : -1.0;
  for (double& v : e.values()) v = std::exp(sign * v);
  return e;
}

ComplexField build_amplitude(GOKind kind, const VectorField& A, const CarlemanWeight& weight, double tau, const Vec& xi,
                             const TimeCutoff& chi) {
  const auto& g = A.grid();
  if (kind == GOKind::Growing && std::abs(dot(xi, weight.omega())) > 1e-12)
    throw std::invalid_argument("spatial frequency must be orthogonal to the weight direction");
  const ScalarField E = transport_factor(A, weight.omega(), kind);
  ComplexField B(g);
  for (int m = 0; m <= g.steps(); ++m) {
    const double t = g.time(m);
    const double ct = chi(t);
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
      Complex osc = 1.0;
      if (kind == GOKind::Growing) osc = std::polar(1.0, -(t * tau + dot(g.coord(i), xi)));
      B.at(m, i) = ct * osc * E.at(m, i);
    }
  }
  return B;
}

double transport_cancellation_residual(const ScalarField& E, const VectorField& A, const CarlemanWeight& weight,
                                       GOKind kind) {
  const auto& g = E.grid();
  const double sign = kind == GOKind::Growing ? 1.0 : -1.0;
  const double sup = E.max_abs();
  if (sup == 0.0) return 0.0;
  double worst = 0.0;
  for (int m = 0; m <= g.steps(); ++m) {
    const auto s = E.slice(m);
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
      if (g.on_boundary(i)) continue;
      const double wa = dot(weight.omega(), A.at(m, i));
      worst = std::max(worst, std::abs(directional_derivative(g, s, i, weight.omega()) + sign * wa * s[i]));
    }
  }
  return worst / sup;
}

ComplexField solve_remainder(GOKind kind, const CoefficientPair& c, const ComplexField& B, const CarlemanWeight& weight,
                             StepperStats* stats) {
  const auto& g = c.grid();
  if (B.grid() != g) throw std::invalid_argument("amplitude and coefficients live on different grids");
  const TimeDirection dir = direction_of(kind);
  const ComplexField Bs = to_stepper_time(kind, B);
  HalfStepField src = cn_residual(operator_coefficients(c, dir), Bs);
  for (auto& v : src.values) v = -v;
  try {
    const ComplexField Rs = cn_solve(operator_coefficients(c, dir, weight.lambda(), weight.omega()), ComplexField(g), &src, stats);
    return to_stepper_time(kind, Rs);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("remainder solve failed (lambda=") + std::to_string(weight.lambda()) + ", " +
                             g.describe() + "): " + e.what());
  }
}

GOSolution build_go_solution(GOKind kind, const CoefficientPair& c, const CarlemanWeight& weight, double tau,
                             const Vec& xi, const TimeCutoff& chi) {
  GOSolution v{kind, weight, tau, xi, build_amplitude(kind, c.convection(), weight, tau, xi, chi), ComplexField(c.grid()), {}};
  v.remainder = solve_remainder(kind, c, v.amplitude, weight, &v.stats);
  return v;
}

double go_residual(const GOSolution& v, const CoefficientPair& c) {
  const double bn = l2_norm(v.amplitude);
  if (bn == 0.0) return 0.0;
  const TimeDirection dir = direction_of(v.kind);
  const ComplexField sum = to_stepper_time(v.kind, v.amplitude + v.remainder);
  const HalfStepField r = cn_residual(operator_coefficients(c, dir, v.weight.lambda(), v.weight.omega()), sum);
  return half_step_l2(r) / bn;
}

}  // namespace cdlab
