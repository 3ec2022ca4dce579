#pragma once

#include <span>

#include "cdlab/field.hpp"

namespace cdlab {

enum class RayRange { HalfLine, FullLine };

/// Off-grid reconstruction used along rays. Cubic is the tensor product of
/// four-point Lagrange stencils (one-sided in the boundary cells), exact for
/// cubics in each variable.
enum class Interpolation { Linear, Cubic };

/// Interpolant of one spatial slice inside the closed box, zero outside.
double interpolate(const SpaceTimeGrid& g, std::span<const double> slice, const Vec& x,
                   Interpolation kind = Interpolation::Cubic);

/// Parameter interval [lo, hi] where x + s w lies in the closed unit box,
/// intersected with [0, inf) for a half line. Returns false when empty.
bool box_chord(int dim, const Vec& x, const Vec& w, RayRange range, double& lo, double& hi);

/// Integral of the interpolant of `slice` along x + s w over the chord.
///
/// Between two consecutive grid-plane crossings the interpolant is a
/// polynomial in s, so a Gauss rule of matching degree integrates it exactly.
double line_integral(const SpaceTimeGrid& g, std::span<const double> slice, const Vec& x, const Vec& w,
                     RayRange range, Interpolation kind = Interpolation::Cubic);

/// Integral of w . F(t_level, x + s w) ds over the half or full line.
double ray_quadrature(const VectorField& F, int level, const Vec& x, const Vec& w, RayRange range,
                      Interpolation kind = Interpolation::Cubic);

/// Same integral for a field given by its component slices.
double ray_quadrature(const SpaceTimeGrid& g, const std::span<const double>* components, const Vec& x,
                      const Vec& w, RayRange range, Interpolation kind = Interpolation::Cubic);

}  // namespace cdlab
