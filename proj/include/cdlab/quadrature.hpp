#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace cdlab {

/// Gauss-Legendre nodes and weights on [0, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int points);

/// One time node of a composite rule.
struct TimeNode {
  double t;
  double weight;
};

/// Composite Gauss rule on [0, T] with panels [0, s], [s, 2s], [2s, 4s], ...
/// so that integrands decaying like exp(-t / s) keep relative accuracy.
std::vector<TimeNode> graded_time_rule(double horizon, double first_panel, int points_per_panel);

/// Composite Gauss rule on [0, T] with equal panels.
std::vector<TimeNode> uniform_time_rule(double horizon, int panels, int points_per_panel);

/// Sum of nonnegative terms exp(l_i), kept as a shifted sum so that terms far
/// below the double range still combine correctly.
class LogSum {
 public:
  void add_log(double l) {
    if (l == -std::numeric_limits<double>::infinity()) return;
    if (l > shift_) {
      sum_ = sum_ * std::exp(shift_ - l) + 1.0;
      shift_ = l;
    } else {
      sum_ += std::exp(l - shift_);
    }
  }
  void add(const LogSum& o) {
    if (o.sum_ > 0.0) add_log(o.log());
  }
  /// -inf for an empty sum.
  double log() const { return sum_ > 0.0 ? shift_ + std::log(sum_) : -std::numeric_limits<double>::infinity(); }

 private:
  double shift_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

/// log(w * v) for v >= 0, -inf when the product vanishes.
inline double log_term(double w, double v) {
  return (w > 0.0 && v > 0.0) ? std::log(w) + std::log(v) : -std::numeric_limits<double>::infinity();
}

}  // namespace cdlab
