#include "cdlab/boundary.hpp"

#include <cmath>
#include <stdexcept>

namespace cdlab {

namespace {
// Normals of box faces are +-e_d, so nu . w is an exact copy of a component;
// the slack only absorbs directions built with rounding, e.g. cos(pi/2).
constexpr double kSignSlack = 1e-14;
}  // namespace

std::string to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::Shadowed: return "shadowed";
    case RegionKind::Illuminated: return "illuminated";
    case RegionKind::NeighborhoodF: return "F";
    case RegionKind::NeighborhoodG: return "G";
    case RegionKind::SigmaPlusEps: return "sigma_plus_eps";
    case RegionKind::Full: return "sigma";
  }
  return "unknown";
}

BoundaryRegion::BoundaryRegion(int dim, RegionKind kind, const Vec& direction, double eps)
    : dim_(dim), kind_(kind), direction_(direction), eps_(eps) {
  if (eps < 0.0) throw std::invalid_argument("boundary region needs eps >= 0");
  for (const BoxFace& f : box_faces(dim)) {
    const double c = dot(f.normal(), direction);
    bool in = false;
    switch (kind) {
      case RegionKind::Shadowed: in = c >= -kSignSlack; break;
      case RegionKind::Illuminated: in = c <= kSignSlack; break;
      case RegionKind::NeighborhoodF: in = c >= -2.0 * eps - kSignSlack; break;
      case RegionKind::NeighborhoodG: in = c <= 2.0 * eps + kSignSlack; break;
      case RegionKind::SigmaPlusEps: in = c > eps; break;
      case RegionKind::Full: in = true; break;
    }
    if (in) faces_.insert(f.id);
  }
}

std::vector<BoundarySample> boundary_samples(const SpaceTimeGrid& grid, FaceSet faces) {
  std::vector<BoundarySample> out;
  const int n = grid.nodes();
  const double h = grid.h();
  for (const BoxFace& f : box_faces(grid.dim())) {
    if (!faces.contains(f.id)) continue;
    const int fixed = f.side == 0 ? 0 : n - 1;
    for (std::size_t i = 0; i < grid.spatial_size(); ++i) {
      const Index3 idx = grid.unflat(i);
      if (idx[f.axis] != fixed) continue;
      double w = 1.0;
      for (int d = 0; d < grid.dim(); ++d) {
        if (d == f.axis) continue;
        w *= (idx[d] == 0 || idx[d] == n - 1) ? 0.5 * h : h;
      }
      out.push_back({f.id, i, w});
    }
  }
  return out;
}

BoundaryTrace::BoundaryTrace(const SpaceTimeGrid& grid, FaceSet faces, std::string tag)
    : grid_(grid), faces_(faces), tag_(std::move(tag)), samples_(boundary_samples(grid, faces)),
      values_(grid.time_levels() * samples_.size(), 0.0) {}

BoundaryTrace BoundaryTrace::from_function(const SpaceTimeGrid& grid, FaceSet faces, std::string tag,
                                           const std::function<double(double, const Vec&)>& fn) {
  BoundaryTrace tr(grid, faces, std::move(tag));
  for (int m = 0; m <= grid.steps(); ++m)
    for (std::size_t s = 0; s < tr.samples_.size(); ++s) tr.at(m, s) = fn(grid.time(m), grid.coord(tr.samples_[s].node));
  return tr;
}

BoundaryTrace BoundaryTrace::restrict_to(FaceSet sub, std::string tag) const {
  if (!sub.subset_of(faces_)) throw std::invalid_argument("restriction faces are not part of the trace");
  BoundaryTrace out(grid_, sub, std::move(tag));
  // Samples are generated face by face in the same order, so a face's block
  // appears contiguously in both layouts.
  std::size_t j = 0;
  for (std::size_t s = 0; s < samples_.size(); ++s) {
    if (!sub.contains(samples_[s].face)) continue;
    for (int m = 0; m <= grid_.steps(); ++m) out.at(m, j) = at(m, s);
    ++j;
  }
  return out;
}

double BoundaryTrace::l2_norm() const {
  double acc = 0.0;
  for (int m = 0; m <= grid_.steps(); ++m) {
    const double wt = grid_.time_weight(m);
    for (std::size_t s = 0; s < samples_.size(); ++s) acc += wt * samples_[s].weight * at(m, s) * at(m, s);
  }
  return std::sqrt(acc);
}

double BoundaryTrace::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

BoundaryTrace& BoundaryTrace::operator-=(const BoundaryTrace& o) {
  if (o.grid_ != grid_ || !(o.faces_ == faces_)) throw std::invalid_argument("traces have different layouts");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

}  // namespace cdlab
