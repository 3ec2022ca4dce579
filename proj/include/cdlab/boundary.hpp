#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cdlab/field.hpp"
#include "cdlab/grid.hpp"

namespace cdlab {

/// One side of the unit box: axis in [0,n), side 0 at x_axis = 0, side 1 at x_axis = 1.
struct BoxFace {
  int id = 0;
  int axis = 0;
  int side = 0;

  Vec normal() const {
    Vec nu{0.0, 0.0, 0.0};
    nu[axis] = side == 0 ? -1.0 : 1.0;
    return nu;
  }
};

inline std::vector<BoxFace> box_faces(int dim) {
  std::vector<BoxFace> faces;
  for (int d = 0; d < dim; ++d)
    for (int s = 0; s < 2; ++s) faces.push_back({2 * d + s, d, s});
  return faces;
}

/// Subset of the 2n box faces as a bit mask.
class FaceSet {
 public:
  FaceSet() = default;
  static FaceSet all(int dim) { return FaceSet(static_cast<std::uint32_t>((1u << (2 * dim)) - 1u)); }
  static FaceSet none() { return FaceSet(0); }

  bool contains(int face_id) const { return (mask_ >> face_id) & 1u; }
  void insert(int face_id) { mask_ |= (1u << face_id); }
  FaceSet complement(int dim) const { return FaceSet(all(dim).mask_ & ~mask_); }
  FaceSet operator|(FaceSet o) const { return FaceSet(mask_ | o.mask_); }
  FaceSet operator&(FaceSet o) const { return FaceSet(mask_ & o.mask_); }
  bool subset_of(FaceSet o) const { return (mask_ & ~o.mask_) == 0; }
  bool empty() const { return mask_ == 0; }
  std::uint32_t mask() const { return mask_; }
  bool operator==(const FaceSet&) const = default;

 private:
  explicit FaceSet(std::uint32_t m) : mask_(m) {}
  std::uint32_t mask_ = 0;
};

enum class RegionKind { Shadowed, Illuminated, NeighborhoodF, NeighborhoodG, SigmaPlusEps, Full };

std::string to_string(RegionKind kind);

/// Boundary subset tied to a direction.
///
/// Shadowed: nu . w >= 0. Illuminated: nu . w <= 0. G collects faces with
/// nu . w0 <= 2 eps and F those with nu . w0 >= -2 eps, so every face outside
/// G has nu . w > eps for all |w - w0| <= eps. SigmaPlusEps: nu . w > eps.
class BoundaryRegion {
 public:
  BoundaryRegion(int dim, RegionKind kind, const Vec& direction, double eps = 0.0);

  RegionKind kind() const { return kind_; }
  const Vec& direction() const { return direction_; }
  double eps() const { return eps_; }
  FaceSet faces() const { return faces_; }
  int dim() const { return dim_; }

 private:
  int dim_;
  RegionKind kind_;
  Vec direction_;
  double eps_;
  FaceSet faces_;
};

/// A node on a box face with its outward normal and surface quadrature weight.
struct BoundarySample {
  int face = 0;
  std::size_t node = 0;
  double weight = 0.0;
};

/// Samples of every node on the faces in `faces`. Edge and corner nodes
/// appear once per face they belong to.
std::vector<BoundarySample> boundary_samples(const SpaceTimeGrid& grid, FaceSet faces);

/// Values on (time level, boundary sample) pairs.
class BoundaryTrace {
 public:
  BoundaryTrace(const SpaceTimeGrid& grid, FaceSet faces, std::string tag);

  static BoundaryTrace from_function(const SpaceTimeGrid& grid, FaceSet faces, std::string tag,
                                     const std::function<double(double, const Vec&)>& fn);
  static BoundaryTrace zero(const SpaceTimeGrid& grid) { return BoundaryTrace(grid, FaceSet::all(grid.dim()), "sigma"); }

  const SpaceTimeGrid& grid() const { return grid_; }
  FaceSet faces() const { return faces_; }
  const std::string& tag() const { return tag_; }
  const std::vector<BoundarySample>& samples() const { return samples_; }

  double& at(int level, std::size_t sample) { return values_[level * samples_.size() + sample]; }
  double at(int level, std::size_t sample) const { return values_[level * samples_.size() + sample]; }
  const std::vector<double>& values() const { return values_; }

  /// Restriction to a subset of this trace's faces.
  BoundaryTrace restrict_to(FaceSet sub, std::string tag) const;

  /// L2 norm over (0,T) x faces, trapezoid in time and on each face.
  double l2_norm() const;
  double max_abs() const;

  BoundaryTrace& operator-=(const BoundaryTrace& o);
  friend BoundaryTrace operator-(BoundaryTrace a, const BoundaryTrace& b) { return a -= b; }

 private:
  SpaceTimeGrid grid_;
  FaceSet faces_;
  std::string tag_;
  std::vector<BoundarySample> samples_;
  std::vector<double> values_;
};

}  // namespace cdlab
