#pragma once

#include <cmath>

#include "cdlab/grid.hpp"

namespace cdlab {

/// exp(1 - 1/(1 - s^2)) on |s| < 1, zero elsewhere; peak value 1 at s = 0.
inline double unit_bump(double s) {
  const double r = 1.0 - s * s;
  if (r <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / r);
}

/// Time cutoff supported on [delta, T - delta] with delta = T/10.
struct TimeCutoff {
  double horizon = 1.0;

  double margin() const { return horizon / 10.0; }
  double operator()(double t) const {
    const double s = (2.0 * t - horizon) / (horizon - 2.0 * margin());
    return unit_bump(s);
  }
  double derivative(double t) const {
    const double half = horizon - 2.0 * margin();
    const double s = (2.0 * t - horizon) / half;
    const double r = 1.0 - s * s;
    if (r <= 0.0) return 0.0;
    // d/ds exp(1 - 1/r) = exp(1 - 1/r) * (-2s / r^2)
    return unit_bump(s) * (-2.0 * s / (r * r)) * (2.0 / half);
  }
};

/// a * exp(1 - 1/(1 - |x-c|^2/r^2)), compactly supported in the ball B(c, r).
struct RadialBump {
  Vec center{0.5, 0.5, 0.5};
  double radius = 0.3;
  double amplitude = 1.0;
  int dim = 2;

  double rho(const Vec& x) const {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) s += (x[d] - center[d]) * (x[d] - center[d]);
    return s / (radius * radius);
  }

  double value(const Vec& x) const {
    const double p = rho(x);
    if (p >= 1.0) return 0.0;
    return amplitude * std::exp(1.0 - 1.0 / (1.0 - p));
  }

  Vec gradient(const Vec& x) const {
    Vec g{0.0, 0.0, 0.0};
    const double p = rho(x);
    if (p >= 1.0) return g;
    const double e = std::exp(1.0 - 1.0 / (1.0 - p));
    const double dp = -e / ((1.0 - p) * (1.0 - p));
    for (int d = 0; d < dim; ++d) g[d] = amplitude * dp * 2.0 * (x[d] - center[d]) / (radius * radius);
    return g;
  }

  /// Second partial d_i d_j.
  double hessian(const Vec& x, int i, int j) const {
    const double p = rho(x);
    if (p >= 1.0) return 0.0;
    const double q = 1.0 - p;
    const double e = std::exp(1.0 - 1.0 / q);
    const double d1 = -e / (q * q);
    const double d2 = e * (2.0 * p - 1.0) / (q * q * q * q);
    const double r2 = radius * radius;
    double h = amplitude * d2 * 4.0 * (x[i] - center[i]) * (x[j] - center[j]) / (r2 * r2);
    if (i == j) h += amplitude * d1 * 2.0 / r2;
    return h;
  }

  double laplacian(const Vec& x) const {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) s += hessian(x, d, d);
    return s;
  }
};

/// a * prod_d (4 x_d (1 - x_d))^3 * exp(-|x - c|^2 / (2 sigma^2)) on the unit
/// box: vanishes to third order on the boundary and has moderate higher
/// derivatives, unlike the radial bump.
struct WindowedGaussian {
  Vec center{0.45, 0.55, 0.5};
  double sigma = 0.12;
  double amplitude = 1.0;
  int dim = 2;

  double value(const Vec& x) const {
    double v = amplitude;
    double r2 = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double w = 4.0 * x[d] * (1.0 - x[d]);
      if (w <= 0.0) return 0.0;
      v *= w * w * w;
      r2 += (x[d] - center[d]) * (x[d] - center[d]);
    }
    return v * std::exp(-r2 / (2.0 * sigma * sigma));
  }
  /// d_i log(value) away from the boundary.
  double log_derivative(const Vec& x, int i) const {
    const double w = 4.0 * x[i] * (1.0 - x[i]);
    return 3.0 * 4.0 * (1.0 - 2.0 * x[i]) / w - (x[i] - center[i]) / (sigma * sigma);
  }
  Vec gradient(const Vec& x) const {
    Vec g{0.0, 0.0, 0.0};
    const double v = value(x);
    if (v == 0.0) return g;
    for (int d = 0; d < dim; ++d) g[d] = v * log_derivative(x, d);
    return g;
  }
  double hessian(const Vec& x, int i, int j) const {
    const double v = value(x);
    if (v == 0.0) return 0.0;
    double h = v * log_derivative(x, i) * log_derivative(x, j);
    if (i == j) {
      const double w = 4.0 * x[i] * (1.0 - x[i]);
      const double dw = 4.0 * (1.0 - 2.0 * x[i]);
      h += v * (3.0 * (-8.0 * w - dw * dw) / (w * w) - 1.0 / (sigma * sigma));
    }
    return h;
  }
  double laplacian(const Vec& x) const {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) s += hessian(x, d, d);
    return s;
  }
};

}  // namespace cdlab
