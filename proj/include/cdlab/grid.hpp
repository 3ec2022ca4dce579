#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdlab {

/// Point or direction in R^n, n <= 3. Unused trailing components are zero so
/// that 3-component dot products are valid for every dimension.
using Vec = std::array<double, 3>;

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1], s * a[2]}; }

using Index3 = std::array<int, 3>;

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform discretization of Q = (0,T) x [0,1]^n.
///
/// Spatial nodes are numbered with x_1 fastest; time levels run 0..M so a
/// space-time field has (M+1) * N^n samples.
class SpaceTimeGrid {
 public:
  SpaceTimeGrid(int dim, int nodes_per_axis, int steps, double horizon)
      : dim_(dim), n_(nodes_per_axis), m_(steps), horizon_(horizon) {
    if (dim != 2 && dim != 3) throw GridError("grid dimension must be 2 or 3");
    if (nodes_per_axis < 8) throw GridError("grid needs at least 8 nodes per axis");
    if (steps < 8) throw GridError("grid needs at least 8 time steps");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw GridError("time horizon must be positive");
    spatial_size_ = 1;
    for (int d = 0; d < dim_; ++d) spatial_size_ *= static_cast<std::size_t>(n_);
    radius_ = corner_radius(dim_, horizon_);
  }

  /// Euclidean norm of the corner (T, 1, ..., 1): the farthest point of the
  /// closed cylinder from the origin.
  static double corner_radius(int dim, double horizon) {
    double r2 = horizon * horizon;
    for (int d = 0; d < dim; ++d) r2 += 1.0;
    return std::sqrt(r2);
  }

  int dim() const { return dim_; }
  int nodes() const { return n_; }
  int steps() const { return m_; }
  double horizon() const { return horizon_; }
  double h() const { return 1.0 / (n_ - 1); }
  double k() const { return horizon_ / m_; }
  double enclosing_radius() const { return radius_; }
  /// Sup-norm bound for admissible convection fields.
  double admissible_bound() const { return 1.0 / (9.0 * radius_); }

  std::size_t spatial_size() const { return spatial_size_; }
  std::size_t time_levels() const { return static_cast<std::size_t>(m_) + 1; }
  std::size_t size() const { return spatial_size_ * time_levels(); }

  double time(int level) const { return level * k(); }

  std::size_t flat(const Index3& idx) const {
    std::size_t f = static_cast<std::size_t>(idx[dim_ - 1]);
    for (int d = dim_ - 2; d >= 0; --d) f = f * n_ + static_cast<std::size_t>(idx[d]);
    return f;
  }

  Index3 unflat(std::size_t f) const {
    Index3 idx{0, 0, 0};
    for (int d = 0; d < dim_; ++d) {
      idx[d] = static_cast<int>(f % n_);
      f /= n_;
    }
    return idx;
  }

  /// Offset of one step along axis d in flat numbering.
  std::size_t stride(int d) const {
    std::size_t s = 1;
    for (int i = 0; i < d; ++i) s *= n_;
    return s;
  }

  Vec coord(std::size_t f) const {
    const Index3 idx = unflat(f);
    Vec x{0.0, 0.0, 0.0};
    for (int d = 0; d < dim_; ++d) x[d] = idx[d] * h();
    return x;
  }

  bool on_boundary(std::size_t f) const {
    const Index3 idx = unflat(f);
    for (int d = 0; d < dim_; ++d)
      if (idx[d] == 0 || idx[d] == n_ - 1) return true;
    return false;
  }

  /// Trapezoid weight of a spatial node for integration over the unit box.
  double volume_weight(std::size_t f) const {
    const Index3 idx = unflat(f);
    double w = 1.0;
    for (int d = 0; d < dim_; ++d) w *= (idx[d] == 0 || idx[d] == n_ - 1) ? 0.5 * h() : h();
    return w;
  }

  /// Trapezoid weight of a time level on [0,T].
  double time_weight(int level) const { return (level == 0 || level == m_) ? 0.5 * k() : k(); }

  bool operator==(const SpaceTimeGrid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && m_ == o.m_ && horizon_ == o.horizon_;
  }
  bool operator!=(const SpaceTimeGrid& o) const { return !(*this == o); }

  std::string describe() const {
    return "dim=" + std::to_string(dim_) + " N=" + std::to_string(n_) + " M=" + std::to_string(m_) +
           " T=" + std::to_string(horizon_);
  }

 private:
  int dim_;
  int n_;
  int m_;
  double horizon_;
  std::size_t spatial_size_ = 1;
  double radius_ = 0.0;
};

}  // namespace cdlab
