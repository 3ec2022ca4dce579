#pragma once

#include <span>

#include "cdlab/field.hpp"

namespace cdlab {

/// Second-order first derivative along `axis` at one node: centered inside,
/// three-point one-sided on the faces.
template <class T>
T axis_derivative(const SpaceTimeGrid& g, std::span<const T> f, std::size_t node, int axis) {
  const int n = g.nodes();
  const std::size_t s = g.stride(axis);
  const int i = static_cast<int>((node / s) % n);
  const double inv2h = 0.5 / g.h();
  if (i == 0) return (-3.0 * f[node] + 4.0 * f[node + s] - f[node + 2 * s]) * inv2h;
  if (i == n - 1) return (3.0 * f[node] - 4.0 * f[node - s] + f[node - 2 * s]) * inv2h;
  return (f[node + s] - f[node - s]) * inv2h;
}

/// Second derivative along `axis`: three-point centered inside, four-point
/// one-sided (exact for cubics) on the faces.
template <class T>
T axis_second_derivative(const SpaceTimeGrid& g, std::span<const T> f, std::size_t node, int axis) {
  const int n = g.nodes();
  const std::size_t s = g.stride(axis);
  const int i = static_cast<int>((node / s) % n);
  const double inv = 1.0 / (g.h() * g.h());
  if (i == 0) return (2.0 * f[node] - 5.0 * f[node + s] + 4.0 * f[node + 2 * s] - f[node + 3 * s]) * inv;
  if (i == n - 1) return (2.0 * f[node] - 5.0 * f[node - s] + 4.0 * f[node - 2 * s] - f[node - 3 * s]) * inv;
  return (f[node + s] - 2.0 * f[node] + f[node - s]) * inv;
}

template <class T>
T slice_laplacian(const SpaceTimeGrid& g, std::span<const T> f, std::size_t node) {
  T acc{};
  for (int d = 0; d < g.dim(); ++d) acc += axis_second_derivative(g, f, node, d);
  return acc;
}

/// w . grad f at one node.
template <class T>
T directional_derivative(const SpaceTimeGrid& g, std::span<const T> f, std::size_t node, const Vec& w) {
  T acc{};
  for (int d = 0; d < g.dim(); ++d)
    if (w[d] != 0.0) acc += w[d] * axis_derivative(g, f, node, d);
  return acc;
}

VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& F);
ScalarField laplacian(const ScalarField& f);

/// |F|^2 pointwise.
ScalarField squared_magnitude(const VectorField& F);

}  // namespace cdlab
