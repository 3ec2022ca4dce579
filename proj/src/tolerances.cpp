#include "cdlab/tolerances.hpp"

#include <stdexcept>

namespace cdlab {

ToleranceTable::ToleranceTable()
    : values_{
          {"polynomial_reproduction", 1e-12},
          {"fourier_roundtrip", 1e-12},
          {"fourier_vs_direct", 1e-10},
          {"gradient_annihilation", 1e-6},
          {"ray_vs_quadrature", 1e-8},
          {"linearity", 1e-12},
          {"solver_residual", 1e-10},
          {"manufactured_order", 1.9},
          {"gauge_relative", 5e-2},
          {"gauge_order", 1.0},
          {"fine_grid_relative", 2e-2},
          {"splitting_consistency", 1e-10},
          {"p2_slack_per_h", 10.0},
          {"transport_residual", 1e-3},
          {"go_residual", 1e-2},
          {"remainder_ratio", 3.0},
          {"remainder_exponent", 0.7},
          {"least_squares", 1e-10},
          {"curl_relative", 1e-3},
          {"curl_spectrum_relative", 5e-2},
          {"potential_relative", 5e-2},
          {"q_relative", 5e-2},
          {"single_mode", 1e-10},
          {"matched_recovery_relative", 5e-2},
          {"harmonic_residual", 1e-2},
          {"certificate_constant", 10.0},
          {"attenuation_taylor", 1e-9},
          {"attenuation_inverse", 1e-10},
          {"transport_order", 1.9},
          {"aperture_curl", 1e-4},
          {"poincare_curl", 1e-3},
          {"runtime_seconds", 60.0},
      } {}

double ToleranceTable::get(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw std::out_of_range("unknown tolerance '" + name + "'");
  return it->second;
}

void ToleranceTable::set(const std::string& name, double value) {
  if (!has(name)) throw std::out_of_range("unknown tolerance '" + name + "'");
  values_[name] = value;
}

std::vector<std::string> ToleranceTable::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

}  // namespace cdlab
