#pragma once

#include <ostream>

#include "cdlab/boundary.hpp"
#include "cdlab/coefficients.hpp"
#include "cdlab/stepper.hpp"

namespace cdlab {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dirichlet field carrying the trace on boundary nodes and zero inside.
/// The trace must cover every face.
ComplexField dirichlet_from_trace(const BoundaryTrace& f);

/// Solves L u = source with u = f on the lateral boundary, u(0) = 0 (forward)
/// or L* v = source with v = f on the boundary, v(T) = 0 (adjoint). The
/// source is sampled at time levels and averaged onto half steps.
ScalarField solve_ibvp(const CoefficientPair& c, const BoundaryTrace& f, const ScalarField* source = nullptr,
                       TimeDirection dir = TimeDirection::Forward, StepperStats* stats = nullptr);

ComplexField solve_ibvp_complex(const CoefficientPair& c, const ComplexField& dirichlet, const HalfStepField* source,
                                TimeDirection dir, StepperStats* stats = nullptr);

/// Outward normal derivative at a face node, second-order one-sided.
template <class T>
T normal_derivative(const SpaceTimeGrid& g, std::span<const T> u, std::size_t node, const BoxFace& face) {
  const std::size_t s = g.stride(face.axis);
  const double inv2h = 0.5 / g.h();
  if (face.side == 0) return -(-3.0 * u[node] + 4.0 * u[node + s] - u[node + 2 * s]) * inv2h;
  return (3.0 * u[node] - 4.0 * u[node - s] + u[node - 2 * s]) * inv2h;
}

/// d_nu u + 2 (nu . A) u on every face.
BoundaryTrace dn_output(const CoefficientPair& c, const ScalarField& u);

/// (N_1 u_1 - N_2 u_2) restricted to the faces of G.
BoundaryTrace dn_difference_on_G(const CoefficientPair& c1, const CoefficientPair& c2, const BoundaryTrace& f,
                                 const BoundaryRegion& G);

/// CSV with columns t, face, x1, x2[, x3], value.
void write_trace_csv(std::ostream& os, const BoundaryTrace& tr);

}  // namespace cdlab
