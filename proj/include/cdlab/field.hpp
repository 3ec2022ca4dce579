#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cdlab/grid.hpp"

namespace cdlab {

using Complex = std::complex<double>;

inline bool is_finite_value(double v) { return std::isfinite(v); }
inline bool is_finite_value(const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

/// Sampled space-time scalar, real or complex.
template <class T>
class BasicField {
 public:
  using value_type = T;

  explicit BasicField(const SpaceTimeGrid& grid) : grid_(grid), values_(grid.size(), T{}) {}
  BasicField(const SpaceTimeGrid& grid, std::vector<T> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw std::invalid_argument("field value count does not match grid");
  }

  /// Samples fn(t, x) at every node.
  static BasicField sample(const SpaceTimeGrid& grid, const std::function<T(double, const Vec&)>& fn) {
    BasicField f(grid);
    for (int m = 0; m <= grid.steps(); ++m) {
      const double t = grid.time(m);
      auto s = f.slice(m);
      for (std::size_t i = 0; i < grid.spatial_size(); ++i) s[i] = fn(t, grid.coord(i));
    }
    return f;
  }

  const SpaceTimeGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  T& at(int level, std::size_t node) { return values_[level * grid_.spatial_size() + node]; }
  const T& at(int level, std::size_t node) const { return values_[level * grid_.spatial_size() + node]; }

  std::span<T> slice(int level) {
    return {values_.data() + level * grid_.spatial_size(), grid_.spatial_size()};
  }
  std::span<const T> slice(int level) const {
    return {values_.data() + level * grid_.spatial_size(), grid_.spatial_size()};
  }

  std::vector<T>& values() { return values_; }
  const std::vector<T>& values() const { return values_; }

  bool all_finite() const {
    for (const T& v : values_)
      if (!is_finite_value(v)) return false;
    return true;
  }

  double max_abs() const {
    double m = 0.0;
    for (const T& v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  BasicField& operator+=(const BasicField& o) {
    check_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  BasicField& operator-=(const BasicField& o) {
    check_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  BasicField& operator*=(T s) {
    for (T& v : values_) v *= s;
    return *this;
  }
  friend BasicField operator+(BasicField a, const BasicField& b) { return a += b; }
  friend BasicField operator-(BasicField a, const BasicField& b) { return a -= b; }
  friend BasicField operator*(T s, BasicField a) { return a *= s; }

 private:
  void check_same(const BasicField& o) const {
    if (grid_ != o.grid_) throw std::invalid_argument("fields live on different grids");
  }

  SpaceTimeGrid grid_;
  std::vector<T> values_;
};

using ScalarField = BasicField<double>;
using ComplexField = BasicField<Complex>;

inline ComplexField to_complex(const ScalarField& f) {
  std::vector<Complex> v(f.values().begin(), f.values().end());
  return ComplexField(f.grid(), std::move(v));
}

/// n-component space-time vector field.
class VectorField {
 public:
  explicit VectorField(const SpaceTimeGrid& grid, bool time_independent = false)
      : grid_(grid), components_(grid.dim(), ScalarField(grid)), time_independent_(time_independent) {}
  VectorField(std::vector<ScalarField> components, bool time_independent)
      : grid_(components.at(0).grid()), components_(std::move(components)), time_independent_(time_independent) {
    if (static_cast<int>(components_.size()) != grid_.dim())
      throw std::invalid_argument("vector field needs one component per spatial axis");
    for (const auto& c : components_)
      if (c.grid() != grid_) throw std::invalid_argument("vector components live on different grids");
  }

  /// Samples fn(t, x). A time-independent field is evaluated once at t = 0
  /// and copied, so its slices are bit-identical.
  static VectorField sample(const SpaceTimeGrid& grid, const std::function<Vec(double, const Vec&)>& fn,
                            bool time_independent) {
    VectorField F(grid, time_independent);
    for (int m = 0; m <= grid.steps(); ++m) {
      const double t = time_independent ? 0.0 : grid.time(m);
      for (std::size_t i = 0; i < grid.spatial_size(); ++i) {
        const Vec v = fn(t, grid.coord(i));
        for (int d = 0; d < grid.dim(); ++d) F.components_[d].at(m, i) = v[d];
      }
    }
    return F;
  }

  const SpaceTimeGrid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  bool time_independent() const { return time_independent_; }

  ScalarField& component(int d) { return components_.at(d); }
  const ScalarField& component(int d) const { return components_.at(d); }

  Vec at(int level, std::size_t node) const {
    Vec v{0.0, 0.0, 0.0};
    for (int d = 0; d < dim(); ++d) v[d] = components_[d].at(level, node);
    return v;
  }

  /// Largest Euclidean length over all samples.
  double sup_norm() const {
    double m = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      double s = 0.0;
      for (int d = 0; d < dim(); ++d) s += components_[d].values()[i] * components_[d].values()[i];
      m = std::max(m, std::sqrt(s));
    }
    return m;
  }

  bool is_admissible() const { return sup_norm() <= grid_.admissible_bound(); }

  bool all_finite_components() const {
    for (const auto& c : components_)
      if (!c.all_finite()) return false;
    return true;
  }

  /// True when every slice equals slice 0 bit for bit.
  bool slices_identical() const {
    for (const auto& c : components_)
      for (int m = 1; m <= grid_.steps(); ++m)
        for (std::size_t i = 0; i < grid_.spatial_size(); ++i)
          if (c.at(m, i) != c.at(0, i)) return false;
    return true;
  }

  VectorField& operator+=(const VectorField& o) {
    for (int d = 0; d < dim(); ++d) components_[d] += o.components_[d];
    time_independent_ = time_independent_ && o.time_independent_;
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    for (int d = 0; d < dim(); ++d) components_[d] -= o.components_[d];
    time_independent_ = time_independent_ && o.time_independent_;
    return *this;
  }
  VectorField& operator*=(double s) {
    for (auto& c : components_) c *= s;
    return *this;
  }
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }

 private:
  SpaceTimeGrid grid_;
  std::vector<ScalarField> components_;
  bool time_independent_;
};

/// Discrete L2(Q) norm with trapezoid weights in space and time.
template <class T>
double l2_norm(const BasicField<T>& f) {
  const auto& g = f.grid();
  double s = 0.0;
  for (int m = 0; m <= g.steps(); ++m) {
    const double wt = g.time_weight(m);
    for (std::size_t i = 0; i < g.spatial_size(); ++i) s += wt * g.volume_weight(i) * std::norm(f.at(m, i));
  }
  return std::sqrt(s);
}

double l2_norm(const VectorField& F);

/// L2(Omega) norm of one time slice.
template <class T>
double slice_l2_norm(const BasicField<T>& f, int level) {
  const auto& g = f.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < g.spatial_size(); ++i) s += g.volume_weight(i) * std::norm(f.at(level, i));
  return std::sqrt(s);
}

}  // namespace cdlab
