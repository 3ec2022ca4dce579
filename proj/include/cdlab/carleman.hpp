#pragma once

#include <array>
#include <ostream>
#include <string>
#include <vector>

#include "cdlab/go.hpp"

namespace cdlab {

/// Pieces of the conjugated operator at half steps, centered like the
/// Crank-Nicolson residual:
///   P1 = -Lap, P2 = d_t - 2 lambda w . grad, P3 = -2 A . grad - 2 lambda (w . A) + q_tilde.
struct OperatorSplit {
  HalfStepField p1, p2, p3;
};

/// v must vanish on the lateral boundary.
OperatorSplit split_operator(const CoefficientPair& c, const CarlemanWeight& weight, const ComplexField& v);
OperatorSplit split_operator(const CoefficientPair& c, const CarlemanWeight& weight, const ScalarField& v);

enum class TimeProfile { Square, SineSquare };

/// u(t, x) = p(t) S(x) with S(x) = amplitude * prod_d x_d (1 - x_d) * exp(-|x - center|^2 / (2 width^2)),
/// p(t) = (t/T)^2 or sin^2(pi t / (2T)). u(0) = 0 and u = 0 on the lateral boundary.
struct CarlemanTestFunction {
  std::string name;
  int dim = 2;
  double horizon = 1.0;
  Vec center{0.5, 0.5, 0.5};
  double width = 0.2;
  TimeProfile profile = TimeProfile::Square;
  double amplitude = 1.0;

  double p(double t) const;
  double dp(double t) const;
  double shape(const Vec& x) const;
  Vec shape_gradient(const Vec& x) const;
  double shape_laplacian(const Vec& x) const;
  double value(double t, const Vec& x) const { return p(t) * shape(x); }
};

/// 3 centers x 2 widths x 2 time profiles.
std::vector<CarlemanTestFunction> carleman_test_suite(int dim, double horizon);

/// Throws std::invalid_argument naming the violated condition
/// ("u(0,.) = 0" or "u = 0 on the lateral boundary").
void validate_test_field(const ComplexField& u, double tolerance = 1e-14);
void validate_test_function(const CarlemanTestFunction& u, const SpaceTimeGrid& g, double tolerance = 1e-14);

/// Natural logs of the six integrals of the boundary estimate:
///   1 lambda^2 int e^{-2phi} |u|^2      2 int e^{-2phi} |grad u|^2
///   3 int e^{-2phi(T)} |u(T)|^2         4 lambda int_{Sigma+} e^{-2phi} |d_nu u|^2 |w.nu|
///   5 int e^{-2phi} |L u|^2             6 lambda int_{Sigma-} e^{-2phi} |d_nu u|^2 |w.nu|
/// Terms 1-4 form the left side, 5-6 the right side without the constant.
struct CarlemanRow {
  std::string member;
  double lambda = 0.0;
  std::array<double, 6> log_terms{};
  double ratio = 0.0;          // (1+2+3+4) / (5+6)
  double leading_ratio = 0.0;  // 1 / 5
};

struct CarlemanReport {
  Vec omega{1.0, 0.0, 0.0};
  std::vector<double> lambdas;
  std::vector<CarlemanRow> rows;
  std::vector<std::string> members;
  /// smallest sweep lambda from which every member's ratio is nonincreasing
  double onset_lambda = 0.0;
  /// max ratio over members and lambda >= onset
  double c_hat = 0.0;
  double leading_ratio_max = 0.0;  // max of term1/term5 over members and the sweep
  bool finite = true;
  bool passed = false;

  const CarlemanRow& row(std::size_t member, std::size_t lambda_index) const {
    return rows.at(member * lambdas.size() + lambda_index);
  }
};

/// Integrals use 3-point Gauss rules in every cell of the coefficient grid
/// (coefficients reconstructed by the cubic interpolant) and graded Gauss
/// panels in time, summed in log space.
CarlemanReport check_boundary_estimate(const CoefficientPair& c, const Vec& omega, const std::vector<double>& lambdas,
                                       const std::vector<CarlemanTestFunction>& suite);

/// int |P2 v|^2 / ((1 + 4 lambda^2) / (16 R^2) int |v|^2); 0 for v = 0.
/// The quadrature uses the cells of g.
double check_p2_lower_bound(const CarlemanWeight& weight, const CarlemanTestFunction& v, const SpaceTimeGrid& g);

struct CrossTermIdentity {
  double cross_term = 0.0;      // 2 int P1 v P2 v
  double final_gradient = 0.0;  // int |grad v(T)|^2
  double boundary_flux = 0.0;   // int_Sigma (w . nu) |d_nu v|^2
  /// |cross - final - 2 lambda flux| / max(|cross|, final)
  double defect = 0.0;
  /// same with lambda in place of 2 lambda
  double defect_unit_coefficient = 0.0;
};

CrossTermIdentity check_cross_term_identity(const CarlemanWeight& weight, const CarlemanTestFunction& v,
                                            const SpaceTimeGrid& g);

/// Columns member, lambda, log_term1..log_term6, ratio.
void write_carleman_csv(std::ostream& os, const CarlemanReport& r);

}  // namespace cdlab
