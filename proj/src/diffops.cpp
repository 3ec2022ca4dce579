#include "cdlab/diffops.hpp"

namespace cdlab {

double l2_norm(const VectorField& F) {
  double s = 0.0;
  for (int d = 0; d < F.dim(); ++d) {
    const double c = l2_norm(F.component(d));
    s += c * c;
  }
  return std::sqrt(s);
}

VectorField gradient(const ScalarField& f) {
  const auto& g = f.grid();
  VectorField out(g, false);
  for (int m = 0; m <= g.steps(); ++m) {
    const auto s = f.slice(m);
    for (int d = 0; d < g.dim(); ++d) {
      auto o = out.component(d).slice(m);
      for (std::size_t i = 0; i < g.spatial_size(); ++i) o[i] = axis_derivative(g, s, i, d);
    }
  }
  return out;
}

ScalarField divergence(const VectorField& F) {
  const auto& g = F.grid();
  ScalarField out(g);
  for (int m = 0; m <= g.steps(); ++m) {
    auto o = out.slice(m);
    for (int d = 0; d < g.dim(); ++d) {
      const auto s = F.component(d).slice(m);
      for (std::size_t i = 0; i < g.spatial_size(); ++i) o[i] += axis_derivative(g, s, i, d);
    }
  }
  return out;
}

ScalarField laplacian(const ScalarField& f) {
  const auto& g = f.grid();
  ScalarField out(g);
  for (int m = 0; m <= g.steps(); ++m) {
    const auto s = f.slice(m);
    auto o = out.slice(m);
    for (std::size_t i = 0; i < g.spatial_size(); ++i) o[i] = slice_laplacian(g, s, i);
  }
  return out;
}

ScalarField squared_magnitude(const VectorField& F) {
  const auto& g = F.grid();
  ScalarField out(g);
  for (int d = 0; d < g.dim(); ++d) {
    const auto& c = F.component(d).values();
    auto& o = out.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += c[i] * c[i];
  }
  return out;
}

}  // namespace cdlab
