#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cdlab/field.hpp"

namespace cdlab {

class CoefficientError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Convection field A and density q with the derived potentials
/// q_tilde = q - div A - |A|^2 and q_tilde_star = q + div A - |A|^2 (q is real).
class CoefficientPair {
 public:
  CoefficientPair(VectorField A, ScalarField q);

  const SpaceTimeGrid& grid() const { return A_.grid(); }
  const VectorField& convection() const { return A_; }
  const ScalarField& density() const { return q_; }
  const ScalarField& divergence_of_convection() const { return div_; }
  const ScalarField& q_tilde() const { return q_tilde_; }
  const ScalarField& q_tilde_star() const { return q_tilde_star_; }
  bool time_independent() const { return time_independent_; }

  /// Largest deviation between the stored q_tilde and a fresh recomputation.
  double q_tilde_consistency() const;

 private:
  VectorField A_;
  ScalarField q_;
  ScalarField div_;
  ScalarField q_tilde_;
  ScalarField q_tilde_star_;
  bool time_independent_ = true;
};

/// Relative slack allowed above the admissible bound for fields scaled onto it.
inline constexpr double kAdmissibleSlack = 1e-12;

using VectorFunction = std::function<Vec(double, const Vec&)>;
using ScalarFunction = std::function<double(double, const Vec&)>;

/// Named analytic convection field, already scaled for a given dimension and horizon.
struct ConvectionPreset {
  std::string name;
  std::string description;
  VectorFunction value;
  bool time_independent = true;
  bool divergence_free = false;
};

struct DensityPreset {
  std::string name;
  std::string description;
  ScalarFunction value;
  bool time_independent = true;
};

std::vector<std::string> convection_preset_names();
std::vector<std::string> density_preset_names();

/// `fraction` is the target sup norm as a multiple of 1/(9R); "at-bound"
/// ignores it and sits on the bound.
ConvectionPreset convection_preset(const std::string& name, int dim, double horizon, double fraction = 0.8);
DensityPreset density_preset(const std::string& name, int dim);

VectorField sample_convection(const ConvectionPreset& p, const SpaceTimeGrid& g);
ScalarField sample_density(const DensityPreset& p, const SpaceTimeGrid& g);

/// Sup norm of an analytic vector field on a fixed reference lattice, used to
/// scale presets identically on every grid.
double reference_sup(const VectorFunction& f, int dim, double horizon, bool time_independent);

}  // namespace cdlab
