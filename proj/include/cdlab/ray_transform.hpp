#pragma once

#include <ostream>
#include <vector>

#include "cdlab/field.hpp"
#include "cdlab/ray_quadrature.hpp"

namespace cdlab {

/// Orthonormal basis of the hyperplane orthogonal to w: Gram-Schmidt on
/// e_1, ..., e_n after w, skipping nearly dependent vectors.
std::vector<Vec> orthonormal_complement(const Vec& w, int dim);

/// cos(a) w0 + sin(a) f_k where f_k is the k-th vector of the complement frame of w0.
Vec perturbed_direction(const Vec& w0, int dim, double a, int k);

/// Largest rotation angle keeping |w - w0| <= eps.
inline double cone_angle(double eps) { return 2.0 * std::asin(0.5 * eps); }

struct DirectionCone {
  Vec center{1.0, 0.0, 0.0};
  double eps = 0.1;
  int dim = 2;
  std::vector<Vec> directions;
};

/// w0 first, then the perturbations cos(a) w0 +- sin(a) f_k at the cone
/// angle, then a deterministic low-discrepancy fill of the cap (golden-ratio
/// angles in 2D, a Fibonacci spiral in 3D). Every direction is renormalized.
DirectionCone sample_cone(const Vec& w0, double eps, int count, int dim);

/// Line integrals of w . F over lines k + s w, k on a square lattice of the
/// plane through the box center orthogonal to w. The lattice spans
/// [-sqrt(n)/2, sqrt(n)/2] along every frame vector, so it covers the shadow
/// of the box.
class RayData {
 public:
  RayData(const SpaceTimeGrid& grid, const DirectionCone& cone, int plane_nodes);

  const SpaceTimeGrid& grid() const { return grid_; }
  const DirectionCone& cone() const { return cone_; }
  int plane_nodes() const { return plane_nodes_; }
  std::size_t plane_size() const { return plane_size_; }
  double plane_step() const { return plane_step_; }
  double half_width() const { return half_width_; }
  const std::vector<Vec>& frame(std::size_t dir) const { return frames_.at(dir); }

  /// In-plane coordinates of lattice point j (dim - 1 entries used).
  Vec plane_coords(std::size_t j) const;
  Vec base_point(std::size_t dir, std::size_t j) const;

  double& at(int level, std::size_t dir, std::size_t j) { return values_[index(level, dir, j)]; }
  double at(int level, std::size_t dir, std::size_t j) const { return values_[index(level, dir, j)]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double max_abs() const;

 private:
  std::size_t index(int level, std::size_t dir, std::size_t j) const {
    return (static_cast<std::size_t>(level) * cone_.directions.size() + dir) * plane_size_ + j;
  }

  SpaceTimeGrid grid_;
  DirectionCone cone_;
  int plane_nodes_;
  std::size_t plane_size_;
  double half_width_;
  double plane_step_;
  std::vector<std::vector<Vec>> frames_;
  std::vector<double> values_;
};

/// Full-line ray transform of F on every level; plane_nodes <= 0 uses N.
RayData transform(const VectorField& F, const DirectionCone& cone, int plane_nodes = 0,
                  Interpolation kind = Interpolation::Cubic);

struct AttenuatedData {
  RayData data;
  /// rays with |1 - exp(-IA)| >= 1, where the inverse is undefined
  std::size_t flagged = 0;
};

/// 1 - exp(-IA) per ray.
AttenuatedData attenuated_moment(const VectorField& A, const DirectionCone& cone, int plane_nodes = 0);
AttenuatedData attenuate(const RayData& linear);

/// -log(1 - v) per ray; throws std::domain_error on a flagged ray.
RayData linear_from_attenuated(const RayData& attenuated);

/// CSV with columns t, omega, k, value (omega and k are indices).
void write_ray_csv(std::ostream& os, const RayData& r);

}  // namespace cdlab
