#pragma once

#include <vector>

#include "cdlab/field.hpp"

namespace cdlab {

/// Unitary DFT of one zero-padded time slice.
///
/// The slice occupies indices [0, N) of a periodic box with P = pad * N
/// nodes per axis and spacing h, so the physical box length is P h and the
/// bin with signed index j has angular frequency 2 pi j / (P h).
struct Spectrum {
  int dim = 2;
  int padded = 0;  // P
  double spacing = 0.0;
  std::vector<Complex> values;  // axis 0 fastest, like grid nodes

  std::size_t bin(const Index3& j) const;
  Index3 signed_index(std::size_t flat) const;
  Vec frequency(std::size_t flat) const;
  double frequency_step() const;
};

/// Forward transform of slice `level`; padding factor must be >= 1 (the
/// default 2 is the working choice everywhere).
Spectrum space_fourier(const ComplexField& f, int level, int pad = 2);
Spectrum space_fourier(const ScalarField& f, int level, int pad = 2);

/// int f(t_level, x) e^{-i xi . x} dx by the trapezoid rule on the grid
/// nodes, at an arbitrary frequency.
Complex space_fourier_at(const ScalarField& f, int level, const Vec& xi);

/// Inverse of space_fourier: returns the P^n padded values.
std::vector<Complex> inverse_space_fourier(const Spectrum& s);

/// Multi-dimensional unitary DFT of a P^dim array (axis 0 fastest).
void unitary_dft(std::vector<Complex>& data, int dim, int points_per_axis, bool inverse);

/// Unitary DFT with possibly different lengths per axis (axis 0 fastest).
void unitary_dft(std::vector<Complex>& data, const std::vector<int>& extents, bool inverse);

/// int_0^T int (lambda^2 + |xi|^2)^m |u^(t,xi)|^2 dxi dt, with the spectral
/// integral normalized so that m = 0 returns the plain L2 norm squared of the
/// zero-padded slice (Riemann weights h^n).
double sobolev_lambda_norm_squared(const ComplexField& f, double m, double lambda, int pad = 2);
double sobolev_lambda_norm_squared(const ScalarField& f, double m, double lambda, int pad = 2);

inline double sobolev_lambda_norm(const ComplexField& f, double m, double lambda, int pad = 2) {
  return std::sqrt(sobolev_lambda_norm_squared(f, m, lambda, pad));
}
inline double sobolev_lambda_norm(const ScalarField& f, double m, double lambda, int pad = 2) {
  return std::sqrt(sobolev_lambda_norm_squared(f, m, lambda, pad));
}

/// Spectral sum h^n sum_bins (lambda^2 + |xi|^2)^m |c|^2 for one spectrum.
double weighted_spectral_mass(const Spectrum& s, double m, double lambda);

}  // namespace cdlab
