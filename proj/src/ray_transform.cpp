#include "cdlab/ray_transform.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <stdexcept>

namespace cdlab {

using std::numbers::pi;

std::vector<Vec> orthonormal_complement(const Vec& w, int dim) {
  std::vector<Vec> basis{w};
  for (int d = 0; d < dim && static_cast<int>(basis.size()) < dim; ++d) {
    Vec e{0.0, 0.0, 0.0};
    e[d] = 1.0;
    for (const Vec& b : basis) e = e - dot(e, b) * b;
    const double n = norm(e);
    if (n < 1e-6) continue;
    basis.push_back((1.0 / n) * e);
  }
  return {basis.begin() + 1, basis.end()};
}

Vec perturbed_direction(const Vec& w0, int dim, double a, int k) {
  const auto frame = orthonormal_complement(w0, dim);
  if (a == 0.0) return w0;
  const Vec v = std::cos(a) * w0 + std::sin(a) * frame.at(k);
  return (1.0 / norm(v)) * v;
}

DirectionCone sample_cone(const Vec& w0, double eps, int count, int dim) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("cone parameter eps must lie in (0, 1/2)");
  if (count < 1) throw std::invalid_argument("cone needs at least one direction");
  if (std::abs(norm(w0) - 1.0) > 1e-14) throw std::invalid_argument("cone center must be a unit vector");
  DirectionCone cone{w0, eps, dim, {w0}};
  const double amax = cone_angle(eps);
  const auto frame = orthonormal_complement(w0, dim);
  auto push = [&](double a, const Vec& f) {
    if (static_cast<int>(cone.directions.size()) >= count) return;
    const Vec v = std::cos(a) * w0 + std::sin(a) * f;
    cone.directions.push_back((1.0 / norm(v)) * v);
  };
  for (std::size_t k = 0; k < frame.size(); ++k) {
    push(amax, frame[k]);
    push(amax, -1.0 * frame[k]);
  }
  const int fill = count - static_cast<int>(cone.directions.size());
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int j = 0; j < fill; ++j) {
    if (dim == 2) {
      // golden-ratio angles in (-amax, amax)
      const double u = std::fmod((j + 1) * golden, 1.0);
      const double a = amax * (2.0 * u - 1.0);
      push(std::abs(a), a >= 0.0 ? frame[0] : -1.0 * frame[0]);
    } else {
      // Fibonacci spiral, equal-area in the geodesic radius
      const double r = amax * std::sqrt((j + 0.5) / fill);
      const double th = 2.0 * pi * std::fmod(j * golden, 1.0);
      push(r, std::cos(th) * frame[0] + std::sin(th) * frame[1]);
    }
  }
  return cone;
}

RayData::RayData(const SpaceTimeGrid& grid, const DirectionCone& cone, int plane_nodes)
    : grid_(grid), cone_(cone), plane_nodes_(plane_nodes > 0 ? plane_nodes : grid.nodes()) {
  if (plane_nodes_ < 2) throw std::invalid_argument("plane lattice needs at least two nodes per axis");
  plane_size_ = grid.dim() == 2 ? plane_nodes_ : static_cast<std::size_t>(plane_nodes_) * plane_nodes_;
  half_width_ = 0.5 * std::sqrt(static_cast<double>(grid.dim()));
  plane_step_ = 2.0 * half_width_ / (plane_nodes_ - 1);
  for (const Vec& w : cone.directions) frames_.push_back(orthonormal_complement(w, grid.dim()));
  values_.assign(static_cast<std::size_t>(grid.steps() + 1) * cone.directions.size() * plane_size_, 0.0);
}

Vec RayData::plane_coords(std::size_t j) const {
  Vec s{0.0, 0.0, 0.0};
  s[0] = -half_width_ + (j % plane_nodes_) * plane_step_;
  if (grid_.dim() == 3) s[1] = -half_width_ + (j / plane_nodes_) * plane_step_;
  return s;
}

Vec RayData::base_point(std::size_t dir, std::size_t j) const {
  const Vec s = plane_coords(j);
  Vec x{0.5, 0.5, grid_.dim() == 3 ? 0.5 : 0.0};
  const auto& f = frames_.at(dir);
  for (std::size_t a = 0; a < f.size(); ++a) x = x + s[a] * f[a];
  return x;
}

double RayData::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

RayData transform(const VectorField& F, const DirectionCone& cone, int plane_nodes, Interpolation kind) {
  const auto& g = F.grid();
  if (cone.dim != g.dim()) throw std::invalid_argument("cone and field have different dimensions");
  RayData out(g, cone, plane_nodes);
  const int levels = F.time_independent() ? 1 : g.steps() + 1;
  for (int m = 0; m < levels; ++m)
    for (std::size_t d = 0; d < cone.directions.size(); ++d)
      for (std::size_t j = 0; j < out.plane_size(); ++j)
        out.at(m, d, j) = ray_quadrature(F, m, out.base_point(d, j), cone.directions[d], RayRange::FullLine, kind);
  if (F.time_independent())
    for (int m = 1; m <= g.steps(); ++m)
      for (std::size_t d = 0; d < cone.directions.size(); ++d)
        for (std::size_t j = 0; j < out.plane_size(); ++j) out.at(m, d, j) = out.at(0, d, j);
  return out;
}

AttenuatedData attenuate(const RayData& linear) {
  AttenuatedData out{linear, 0};
  for (double& v : out.data.values()) {
    v = -std::expm1(-v);
    if (std::abs(v) >= 1.0) ++out.flagged;
  }
  return out;
}

AttenuatedData attenuated_moment(const VectorField& A, const DirectionCone& cone, int plane_nodes) {
  return attenuate(transform(A, cone, plane_nodes));
}

RayData linear_from_attenuated(const RayData& attenuated) {
  RayData out = attenuated;
  for (double& v : out.values()) {
    if (v >= 1.0) throw std::domain_error("attenuated ray value >= 1 has no logarithmic inverse");
    v = -std::log1p(-v);
  }
  return out;
}

void write_ray_csv(std::ostream& os, const RayData& r) {
  const auto& g = r.grid();
  os << "t,omega,k,value\n" << std::setprecision(17);
  for (int m = 0; m <= g.steps(); ++m)
    for (std::size_t d = 0; d < r.cone().directions.size(); ++d)
      for (std::size_t j = 0; j < r.plane_size(); ++j) os << g.time(m) << "," << d << "," << j << "," << r.at(m, d, j) << "\n";
}

}  // namespace cdlab
