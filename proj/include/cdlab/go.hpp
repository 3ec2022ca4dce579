#pragma once

#include "cdlab/analytic.hpp"
#include "cdlab/coefficients.hpp"
#include "cdlab/ray_quadrature.hpp"
#include "cdlab/stepper.hpp"

namespace cdlab {

/// phi(t, x) = lambda^2 t + lambda w . x.
class CarlemanWeight {
 public:
  CarlemanWeight(double lambda, const Vec& omega, int dim);

  double lambda() const { return lambda_; }
  const Vec& omega() const { return omega_; }
  int dim() const { return dim_; }
  double phi(double t, const Vec& x) const { return lambda_ * lambda_ * t + lambda_ * dot(omega_, x); }
  /// d_t phi - |grad phi|^2, zero by construction.
  double eikonal_defect() const { return lambda_ * lambda_ - lambda_ * lambda_ * dot(omega_, omega_); }

 private:
  double lambda_;
  Vec omega_;
  int dim_;
};

enum class GOKind { Growing, Decaying };

std::string to_string(GOKind kind);

/// Psi(t, x) = int_0^inf w . A(t, x + s w) ds at every node, A extended by zero.
ScalarField ray_exponent(const VectorField& A, const Vec& omega, Interpolation kind = Interpolation::Cubic);

/// exp(+Psi) for growing and exp(-Psi) for decaying amplitudes.
ScalarField transport_factor(const VectorField& A, const Vec& omega, GOKind kind);

/// B_g = chi(t) exp(-i(t tau + x . xi)) exp(Psi), B_d = chi(t) exp(-Psi).
/// Requires xi . w = 0 for the growing kind.
ComplexField build_amplitude(GOKind kind, const VectorField& A, const CarlemanWeight& weight, double tau, const Vec& xi,
                             const TimeCutoff& chi);

/// sup over interior nodes of |w . grad_h E +- (w . A) E| / sup |E| (sign + for
/// growing, - for decaying): the lambda-order part of the conjugated operator
/// applied to the amplitude, divided by 2 lambda.
double transport_cancellation_residual(const ScalarField& E, const VectorField& A, const CarlemanWeight& weight,
                                       GOKind kind = GOKind::Growing);

struct GOSolution {
  GOKind kind = GOKind::Growing;
  CarlemanWeight weight{1.0, {1.0, 0.0, 0.0}, 2};
  double tau = 0.0;
  Vec xi{0.0, 0.0, 0.0};
  ComplexField amplitude;
  ComplexField remainder;
  StepperStats stats;

  /// log of the exponential prefactor: +phi for growing, -phi for decaying.
  double log_prefactor(double t, const Vec& x) const {
    return kind == GOKind::Growing ? weight.phi(t, x) : -weight.phi(t, x);
  }
};

/// Remainder of the conjugated equation L_phi R = -L B (growing, R(0) = 0) or
/// L*_phi R = -L* B (decaying, R(T) = 0), R = 0 on the lateral boundary. The
/// right-hand side is the discrete operator applied to B at half steps.
ComplexField solve_remainder(GOKind kind, const CoefficientPair& c, const ComplexField& B, const CarlemanWeight& weight,
                             StepperStats* stats = nullptr);

GOSolution build_go_solution(GOKind kind, const CoefficientPair& c, const CarlemanWeight& weight, double tau,
                             const Vec& xi, const TimeCutoff& chi);

/// || L_phi (B + R) ||_{L2(Q)} / ||B||_{L2(Q)} with the discrete conjugated operator.
double go_residual(const GOSolution& v, const CoefficientPair& c);

}  // namespace cdlab
