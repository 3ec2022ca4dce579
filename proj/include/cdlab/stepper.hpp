#pragma once

#include <vector>

#include "cdlab/coefficients.hpp"
#include "cdlab/field.hpp"

namespace cdlab {

/// Coefficients of d_t u = Lap u + b . grad u + c u + s, in the stepper's own
/// time (which runs backward for adjoint problems).
struct StepperCoefficients {
  SpaceTimeGrid grid{2, 8, 8, 1.0};
  bool time_independent = true;
  std::vector<Vec> drift;         // per stored level, per node
  std::vector<double> reaction;   // per stored level, per node

  std::size_t stored(int level) const {
    return time_independent ? 0 : static_cast<std::size_t>(level) * grid.spatial_size();
  }
  const Vec& b(int level, std::size_t node) const { return drift[stored(level) + node]; }
  double c(int level, std::size_t node) const { return reaction[stored(level) + node]; }
};

enum class TimeDirection { Forward, Adjoint };

/// Stepper coefficients of the (possibly conjugated) operator.
///
/// Forward: L_phi = d_t - Lap - 2(A + lambda w).grad - 2 lambda (w.A) + q_tilde,
/// stepped as b = 2A + 2 lambda w, c = 2 lambda w.A - q_tilde.
/// Adjoint: L*_phi = -d_t - Lap + 2(A + lambda w).grad - 2 lambda (w.A) + q_tilde_star
/// in reversed time s = T - t, so b = -2A - 2 lambda w, c = 2 lambda w.A - q_tilde_star.
/// lambda = 0 gives the unconjugated operators.
StepperCoefficients operator_coefficients(const CoefficientPair& c, TimeDirection dir, double lambda = 0.0,
                                          const Vec& omega = {0.0, 0.0, 0.0});

/// Values at the M half steps t_{m+1/2}, interior nodes meaningful.
struct HalfStepField {
  SpaceTimeGrid grid{2, 8, 8, 1.0};
  std::vector<Complex> values;

  explicit HalfStepField(const SpaceTimeGrid& g) : grid(g), values(static_cast<std::size_t>(g.steps()) * g.spatial_size()) {}
  Complex& at(int half, std::size_t node) { return values[half * grid.spatial_size() + node]; }
  const Complex& at(int half, std::size_t node) const { return values[half * grid.spatial_size() + node]; }
};

/// Average of neighbouring levels.
HalfStepField half_step_average(const ComplexField& f);

/// L2 norm over (0,T) x interior nodes with weights k h^n.
double half_step_l2(const HalfStepField& f);

/// Reverses the level order (t -> T - t).
ComplexField reverse_time(const ComplexField& f);
HalfStepField reverse_time(const HalfStepField& f);

/// Crank-Nicolson residual at interior nodes:
/// (u^{m+1} - u^m)/k - (L^{m+1} u^{m+1} + L^m u^m)/2 - s^{m+1/2}, with L = Lap + b.grad + c.
/// Without a source this is the discrete (d_t - L) u.
HalfStepField cn_residual(const StepperCoefficients& co, const ComplexField& u, const HalfStepField* source = nullptr);

struct StepperStats {
  double max_linear_residual = 0.0;
  int factorizations = 0;
};

/// Marches from u^0 = initial level of `dirichlet` (all nodes) with boundary
/// nodes pinned to `dirichlet` at every level.
ComplexField cn_solve(const StepperCoefficients& co, const ComplexField& dirichlet, const HalfStepField* source = nullptr,
                      StepperStats* stats = nullptr);

}  // namespace cdlab
