#include "cdlab/ray_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace cdlab {

namespace {

constexpr double kEdgeSlack = 1e-12;

struct GaussRule {
  int count;
  double nodes[5];
  double weights[5];
};

// Gauss-Legendre on [-1, 1]
constexpr GaussRule kGauss2{2, {-0.5773502691896257, 0.5773502691896257}, {1.0, 1.0}};
constexpr GaussRule kGauss3{3, {-0.7745966692414834, 0.0, 0.7745966692414834},
                            {0.5555555555555556, 0.8888888888888888, 0.5555555555555556}};
constexpr GaussRule kGauss4{4,
                            {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526},
                            {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538}};
constexpr GaussRule kGauss5{5,
                            {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640},
                            {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                             0.2369268850561891}};

// Degree along a line is dim for the multilinear interpolant and 3 dim for the cubic one.
const GaussRule& rule_for(int dim, Interpolation kind) {
  const int degree = kind == Interpolation::Linear ? dim : 3 * dim;
  if (degree <= 3) return kGauss2;
  if (degree <= 5) return kGauss3;
  if (degree <= 7) return kGauss4;
  return kGauss5;
}

std::vector<double> crossings(const SpaceTimeGrid& g, const Vec& x, const Vec& w, double lo, double hi) {
  std::vector<double> s{lo, hi};
  const double h = g.h();
  for (int d = 0; d < g.dim(); ++d) {
    if (std::abs(w[d]) < 1e-15) continue;
    const double a = x[d] + lo * w[d];
    const double b = x[d] + hi * w[d];
    const int j0 = static_cast<int>(std::ceil(std::min(a, b) / h));
    const int j1 = static_cast<int>(std::floor(std::max(a, b) / h));
    for (int j = j0; j <= j1; ++j) {
      const double sj = (j * h - x[d]) / w[d];
      if (sj > lo && sj < hi) s.push_back(sj);
    }
  }
  std::sort(s.begin(), s.end());
  return s;
}

// Lagrange weights on nodes first..first+3 evaluated at grid coordinate u.
void cubic_weights(double u, int first, double w[4]) {
  for (int a = 0; a < 4; ++a) {
    double p = 1.0;
    for (int b = 0; b < 4; ++b)
      if (b != a) p *= (u - (first + b)) / static_cast<double>(a - b);
    w[a] = p;
  }
}

template <class Visit>
double segment_sum(const SpaceTimeGrid& g, const Vec& x, const Vec& w, RayRange range, Interpolation kind,
                   Visit&& value_at) {
  double lo = 0.0, hi = 0.0;
  if (!box_chord(g.dim(), x, w, range, lo, hi)) return 0.0;
  const auto s = crossings(g, x, w, lo, hi);
  const GaussRule& rule = rule_for(g.dim(), kind);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double half = 0.5 * (s[i + 1] - s[i]);
    if (half <= 0.0) continue;
    const double mid = 0.5 * (s[i] + s[i + 1]);
    for (int q = 0; q < rule.count; ++q) acc += half * rule.weights[q] * value_at(x + (mid + half * rule.nodes[q]) * w);
  }
  return acc;
}

}  // namespace

double interpolate(const SpaceTimeGrid& g, std::span<const double> slice, const Vec& x, Interpolation kind) {
  const int n = g.nodes();
  const double h = g.h();
  const int dim = g.dim();
  double u[3] = {0.0, 0.0, 0.0};
  int cell[3] = {0, 0, 0};
  for (int d = 0; d < dim; ++d) {
    if (x[d] < -kEdgeSlack || x[d] > 1.0 + kEdgeSlack) return 0.0;
    u[d] = std::clamp(x[d], 0.0, 1.0) / h;
    cell[d] = std::clamp(static_cast<int>(std::floor(u[d])), 0, n - 2);
  }

  if (kind == Interpolation::Linear) {
    double acc = 0.0;
    for (int c = 0; c < (1 << dim); ++c) {
      double wgt = 1.0;
      Index3 idx{0, 0, 0};
      for (int d = 0; d < dim; ++d) {
        const int bit = (c >> d) & 1;
        const double f = u[d] - cell[d];
        idx[d] = cell[d] + bit;
        wgt *= bit ? f : 1.0 - f;
      }
      if (wgt != 0.0) acc += wgt * slice[g.flat(idx)];
    }
    return acc;
  }

  int first[3] = {0, 0, 0};
  double wts[3][4] = {{1, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}};
  for (int d = 0; d < dim; ++d) {
    first[d] = std::clamp(cell[d] - 1, 0, n - 4);
    cubic_weights(u[d], first[d], wts[d]);
  }
  const int span2 = dim == 3 ? 4 : 1;
  double acc = 0.0;
  for (int c2 = 0; c2 < span2; ++c2)
    for (int c1 = 0; c1 < 4; ++c1) {
      const double w12 = wts[1][c1] * (dim == 3 ? wts[2][c2] : 1.0);
      Index3 idx{first[0], first[1] + c1, dim == 3 ? first[2] + c2 : 0};
      const std::size_t base = g.flat(idx);
      double row = 0.0;
      for (int c0 = 0; c0 < 4; ++c0) row += wts[0][c0] * slice[base + c0];
      acc += w12 * row;
    }
  return acc;
}

bool box_chord(int dim, const Vec& x, const Vec& w, RayRange range, double& lo, double& hi) {
  lo = range == RayRange::HalfLine ? 0.0 : -std::numeric_limits<double>::infinity();
  hi = std::numeric_limits<double>::infinity();
  for (int d = 0; d < dim; ++d) {
    if (std::abs(w[d]) < 1e-15) {
      if (x[d] < -kEdgeSlack || x[d] > 1.0 + kEdgeSlack) return false;
      continue;
    }
    double a = (0.0 - x[d]) / w[d];
    double b = (1.0 - x[d]) / w[d];
    if (a > b) std::swap(a, b);
    lo = std::max(lo, a);
    hi = std::min(hi, b);
  }
  return hi > lo;
}

double line_integral(const SpaceTimeGrid& g, std::span<const double> slice, const Vec& x, const Vec& w,
                     RayRange range, Interpolation kind) {
  return segment_sum(g, x, w, range, kind, [&](const Vec& p) { return interpolate(g, slice, p, kind); });
}

double ray_quadrature(const SpaceTimeGrid& g, const std::span<const double>* components, const Vec& x,
                      const Vec& w, RayRange range, Interpolation kind) {
  return segment_sum(g, x, w, range, kind, [&](const Vec& p) {
    double v = 0.0;
    for (int d = 0; d < g.dim(); ++d)
      if (w[d] != 0.0) v += w[d] * interpolate(g, components[d], p, kind);
    return v;
  });
}

double ray_quadrature(const VectorField& F, int level, const Vec& x, const Vec& w, RayRange range,
                      Interpolation kind) {
  std::span<const double> comps[3];
  for (int d = 0; d < F.dim(); ++d) comps[d] = F.component(d).slice(level);
  return ray_quadrature(F.grid(), comps, x, w, range, kind);
}

}  // namespace cdlab
