#include "cdlab/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace cdlab {

namespace {

// FFTW planning is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <class T>
Spectrum transform_slice(const BasicField<T>& f, int level, int pad) {
  if (pad < 1) throw std::invalid_argument("padding factor must be >= 1");
  const auto& g = f.grid();
  Spectrum s;
  s.dim = g.dim();
  s.padded = pad * g.nodes();
  s.spacing = g.h();
  std::size_t total = 1;
  for (int d = 0; d < s.dim; ++d) total *= static_cast<std::size_t>(s.padded);
  s.values.assign(total, Complex{});
  const auto slice = f.slice(level);
  for (std::size_t i = 0; i < g.spatial_size(); ++i) s.values[s.bin(g.unflat(i))] = Complex(slice[i]);
  unitary_dft(s.values, s.dim, s.padded, false);
  return s;
}

template <class T>
double sobolev_impl(const BasicField<T>& f, double m, double lambda, int pad) {
  if (!(lambda > 0.0)) throw std::invalid_argument("sobolev_lambda_norm needs lambda > 0");
  const auto& g = f.grid();
  double acc = 0.0;
  for (int level = 0; level <= g.steps(); ++level) {
    const double wt = g.time_weight(level);
    if (wt == 0.0) continue;
    acc += wt * weighted_spectral_mass(transform_slice(f, level, pad), m, lambda);
  }
  return acc;
}

}  // namespace

std::size_t Spectrum::bin(const Index3& j) const {
  std::size_t f = 0;
  for (int d = dim - 1; d >= 0; --d) {
    int jd = j[d] % padded;
    if (jd < 0) jd += padded;
    f = f * padded + static_cast<std::size_t>(jd);
  }
  return f;
}

Index3 Spectrum::signed_index(std::size_t flat) const {
  Index3 j{0, 0, 0};
  for (int d = 0; d < dim; ++d) {
    int jd = static_cast<int>(flat % padded);
    flat /= padded;
    if (jd > padded / 2) jd -= padded;
    j[d] = jd;
  }
  return j;
}

double Spectrum::frequency_step() const { return 2.0 * std::numbers::pi / (padded * spacing); }

Vec Spectrum::frequency(std::size_t flat) const {
  const Index3 j = signed_index(flat);
  const double step = frequency_step();
  Vec xi{0.0, 0.0, 0.0};
  for (int d = 0; d < dim; ++d) xi[d] = step * j[d];
  return xi;
}

void unitary_dft(std::vector<Complex>& data, const std::vector<int>& extents, bool inverse) {
  std::size_t total = 1;
  for (int e : extents) total *= static_cast<std::size_t>(e);
  if (data.size() != total) throw std::invalid_argument("unitary_dft: data size does not match extents");
  // FFTW is row-major with the last index fastest; our axis 0 is fastest.
  std::vector<int> dims(extents.rbegin(), extents.rend());
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), ptr, ptr, inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                         FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(total));
  for (auto& v : data) v *= scale;
}

void unitary_dft(std::vector<Complex>& data, int dim, int points_per_axis, bool inverse) {
  unitary_dft(data, std::vector<int>(dim, points_per_axis), inverse);
}

Complex space_fourier_at(const ScalarField& f, int level, const Vec& xi) {
  const auto& g = f.grid();
  const auto s = f.slice(level);
  Complex acc{};
  for (std::size_t i = 0; i < g.spatial_size(); ++i)
    if (s[i] != 0.0) acc += g.volume_weight(i) * s[i] * std::polar(1.0, -dot(xi, g.coord(i)));
  return acc;
}

Spectrum space_fourier(const ComplexField& f, int level, int pad) { return transform_slice(f, level, pad); }
Spectrum space_fourier(const ScalarField& f, int level, int pad) { return transform_slice(f, level, pad); }

std::vector<Complex> inverse_space_fourier(const Spectrum& s) {
  std::vector<Complex> out = s.values;
  unitary_dft(out, s.dim, s.padded, true);
  return out;
}

double weighted_spectral_mass(const Spectrum& s, double m, double lambda) {
  const double cell = std::pow(s.spacing, s.dim);
  const double l2 = lambda * lambda;
  double acc = 0.0;
  for (std::size_t b = 0; b < s.values.size(); ++b) {
    const double mag = std::norm(s.values[b]);
    if (mag == 0.0) continue;
    const Vec xi = s.frequency(b);
    acc += std::pow(l2 + dot(xi, xi), m) * mag;
  }
  return cell * acc;
}

double sobolev_lambda_norm_squared(const ComplexField& f, double m, double lambda, int pad) {
  return sobolev_impl(f, m, lambda, pad);
}
double sobolev_lambda_norm_squared(const ScalarField& f, double m, double lambda, int pad) {
  return sobolev_impl(f, m, lambda, pad);
}

}  // namespace cdlab
