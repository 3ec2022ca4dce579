#include "cdlab/quadrature.hpp"

#include <numbers>
#include <stdexcept>

namespace cdlab {

GaussRule gauss_legendre(int points) {
  if (points < 1) throw std::invalid_argument("Gauss rule needs at least one point");
  GaussRule r;
  r.nodes.resize(points);
  r.weights.resize(points);
  for (int i = 0; i < points; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess
    double x = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= points; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (points == 1) p0 = 1.0;
      dp = points * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[points - 1 - i] = 0.5 * (1.0 + x);
    r.weights[points - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

namespace {

void append_panel(std::vector<TimeNode>& out, const GaussRule& g, double a, double b) {
  for (std::size_t i = 0; i < g.nodes.size(); ++i) out.push_back({a + (b - a) * g.nodes[i], (b - a) * g.weights[i]});
}

}  // namespace

std::vector<TimeNode> graded_time_rule(double horizon, double first_panel, int points_per_panel) {
  if (!(first_panel > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("graded time rule needs positive lengths");
  const GaussRule g = gauss_legendre(points_per_panel);
  std::vector<TimeNode> out;
  double a = 0.0, b = std::min(first_panel, horizon);
  while (true) {
    append_panel(out, g, a, b);
    if (b >= horizon) break;
    a = b;
    b = std::min(2.0 * b, horizon);
  }
  return out;
}

std::vector<TimeNode> uniform_time_rule(double horizon, int panels, int points_per_panel) {
  const GaussRule g = gauss_legendre(points_per_panel);
  std::vector<TimeNode> out;
  for (int p = 0; p < panels; ++p) append_panel(out, g, horizon * p / panels, horizon * (p + 1) / panels);
  return out;
}

}  // namespace cdlab
