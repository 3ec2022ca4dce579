#include "cdlab/recovery.hpp"

#include <Eigen/Sparse>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>

#include "cdlab/analytic.hpp"
#include "cdlab/diffops.hpp"
#include "cdlab/forward.hpp"
#include "cdlab/fourier.hpp"
#include "cdlab/go.hpp"

namespace cdlab {

using std::numbers::pi;

CurlField::CurlField(const SpaceTimeGrid& grid) : grid_(grid), pairs_(pair_count(grid.dim()), ScalarField(grid)) {}

double CurlField::at(int level, std::size_t node, int i, int j) const {
  if (i == j) return 0.0;
  if (i < j) return pairs_[pair_index(i, j, grid_.dim())].at(level, node);
  return -pairs_[pair_index(j, i, grid_.dim())].at(level, node);
}

double CurlField::max_abs() const {
  double m = 0.0;
  for (const auto& p : pairs_) m = std::max(m, p.max_abs());
  return m;
}

double CurlField::l2_norm() const {
  double s = 0.0;
  for (const auto& p : pairs_)
    for (int m = 0; m <= grid_.steps(); ++m)
      for (std::size_t i = 0; i < grid_.spatial_size(); ++i)
        s += 2.0 * grid_.time_weight(m) * grid_.volume_weight(i) * p.at(m, i) * p.at(m, i);
  return std::sqrt(s);
}

CurlField curl_matrix(const VectorField& F) {
  const auto& g = F.grid();
  const int n = g.dim();
  CurlField h(g);
  for (int m = 0; m <= g.steps(); ++m)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const auto fi = F.component(i).slice(m);
        const auto fj = F.component(j).slice(m);
        auto out = h.pair(CurlField::pair_index(i, j, n)).slice(m);
        for (std::size_t node = 0; node < g.spatial_size(); ++node)
          out[node] = axis_derivative<double>(g, fi, node, j) - axis_derivative<double>(g, fj, node, i);
      }
  return h;
}

Eigen::MatrixXd frequency_rotation(double phi1, double theta, int dim) {
  const double c = std::cos(phi1), s = std::sin(phi1);
  if (dim == 2) {
    Eigen::MatrixXd A(2, 2);
    A << c, -s, s, c;
    return A;
  }
  if (dim != 3) throw std::invalid_argument("frequency_rotation supports n = 2 and n = 3");
  const double ct = std::cos(theta), st = std::sin(theta);
  Eigen::MatrixXd A(3, 3);
  A << c * ct, -s, c * st,  //
      s * ct, c, s * st,    //
      -st, 0.0, ct;
  return A;
}

Eigen::MatrixXd frequency_rotation(const Vec& xi, int dim) {
  const double r = norm(xi);
  if (r == 0.0) throw std::invalid_argument("frequency_rotation needs a nonzero frequency");
  const Vec u = (1.0 / r) * xi;
  if (dim == 2) return frequency_rotation(std::atan2(u[0], u[1]), 0.0, 2);
  const double phi1 = std::acos(std::clamp(u[1], -1.0, 1.0));
  const double theta = (u[0] == 0.0 && u[2] == 0.0) ? 0.0 : std::atan2(u[2], u[0]);
  return frequency_rotation(phi1, theta, 3);
}

FrequencySystem build_frequency_system(const Vec& xi, const DirectionCone& cone, double tol) {
  const int n = cone.dim;
  const double r = norm(xi);
  if (r == 0.0) throw std::invalid_argument("build_frequency_system needs a nonzero frequency");
  FrequencySystem sys;
  sys.xi = xi;
  sys.dim = n;
  sys.rotation = frequency_rotation(xi, n);
  sys.reduced.resize(n - 1, n);
  for (int row = 0, out = 0; row < n; ++row)
    if (row != 1) sys.reduced.row(out++) = sys.rotation.row(row);
  sys.reduced_rank = static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(sys.reduced).rank());

  const Vec u = (1.0 / r) * xi;
  for (std::size_t d = 0; d < cone.directions.size(); ++d)
    if (std::abs(dot(cone.directions[d], u)) <= tol) sys.directions.push_back(d);
  if (sys.directions.empty())
    throw ApertureError("frequency outside aperture: no cone direction is orthogonal to xi = (" +
                        std::to_string(xi[0]) + ", " + std::to_string(xi[1]) + ", " + std::to_string(xi[2]) + ")");

  const int P = CurlField::pair_count(n);
  std::vector<Eigen::RowVectorXd> rows;
  for (std::size_t a = 0; a < sys.directions.size(); ++a) {
    const Vec& w = cone.directions[sys.directions[a]];
    for (int k = 0; k < n; ++k) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(P);
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          row(CurlField::pair_index(i, j, n)) = (j == k ? w[i] : 0.0) - (i == k ? w[j] : 0.0);
      if (row.cwiseAbs().maxCoeff() < 1e-14) continue;
      rows.push_back(row);
      sys.equation_direction.push_back(a);
      sys.equation_eta.push_back(k);
    }
  }
  sys.coefficients.resize(static_cast<Eigen::Index>(rows.size()), P);
  for (std::size_t e = 0; e < rows.size(); ++e) sys.coefficients.row(static_cast<Eigen::Index>(e)) = rows[e];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.coefficients);
  svd.setThreshold(tol);
  sys.rank = static_cast<int>(svd.rank());
  return sys;
}

std::vector<Vec> rotated_perturbations(const Eigen::MatrixXd& rotation, const std::vector<double>& angles) {
  const int n = static_cast<int>(rotation.rows());
  std::vector<Vec> out;
  for (double a : angles) {
    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(n);
    w0(0) = std::cos(a);
    if (n == 3) w0(2) = std::sin(a);
    const Eigen::VectorXd w = rotation.transpose() * w0;
    Vec v{0.0, 0.0, 0.0};
    for (int d = 0; d < n; ++d) v[d] = w(d);
    out.push_back(v);
  }
  return out;
}

std::vector<Vec> aperture_frequencies(const DirectionCone& cone, int radial, double step) {
  std::vector<Vec> lines;
  const auto& D = cone.directions;
  if (cone.dim == 2) {
    for (const Vec& w : D) lines.push_back(Vec{-w[1], w[0], 0.0});
  } else {
    for (std::size_t a = 0; a < D.size(); ++a)
      for (std::size_t b = a + 1; b < D.size(); ++b) {
        const Vec c{D[a][1] * D[b][2] - D[a][2] * D[b][1], D[a][2] * D[b][0] - D[a][0] * D[b][2],
                    D[a][0] * D[b][1] - D[a][1] * D[b][0]};
        const double r = norm(c);
        if (r > 1e-6) lines.push_back((1.0 / r) * c);
      }
  }
  std::vector<Vec> out;
  for (const Vec& u : lines)
    for (int j = 1; j <= radial; ++j) out.push_back((step * j) * u);
  return out;
}

Complex CurlSpectrum::entry(int level, std::size_t f, int i, int j) const {
  if (i == j) return 0.0;
  if (i < j) return at(level, f, CurlField::pair_index(i, j, dim));
  return -at(level, f, CurlField::pair_index(j, i, dim));
}

std::size_t CurlSpectrum::determined_count() const {
  std::size_t c = 0;
  for (char d : determined) c += d ? 1 : 0;
  return c;
}

double CurlSpectrum::l2_norm() const {
  const int P = CurlField::pair_count(dim);
  double s = 0.0;
  for (int m = 0; m < levels; ++m)
    for (std::size_t f = 0; f < frequencies.size(); ++f) {
      if (!determined[f]) continue;
      for (int p = 0; p < P; ++p) s += std::norm(at(m, f, p));
    }
  return std::sqrt(s);
}

namespace {

CurlSpectrum empty_spectrum(int dim, int levels, const std::vector<Vec>& freqs) {
  CurlSpectrum s;
  s.dim = dim;
  s.levels = levels;
  s.frequencies = freqs;
  s.values.assign(static_cast<std::size_t>(levels) * freqs.size() * CurlField::pair_count(dim), Complex{});
  s.rank.assign(freqs.size(), CurlField::pair_count(dim));
  s.determined.assign(freqs.size(), 1);
  return s;
}

// int_{w-perp} e^{-i xi . k} IF(k) dk on the plane lattice
Complex slice_fourier(const RayData& data, int level, std::size_t dir, const Vec& xi) {
  const double w = std::pow(data.plane_step(), data.grid().dim() - 1);
  Complex s{};
  for (std::size_t j = 0; j < data.plane_size(); ++j) {
    const double v = data.at(level, dir, j);
    if (v == 0.0) continue;
    s += v * std::polar(1.0, -dot(xi, data.base_point(dir, j)));
  }
  return w * s;
}

}  // namespace

CurlSpectrum recover_curl_spectrum(const RayData& data, const std::vector<Vec>& frequencies, double tol) {
  const auto& g = data.grid();
  const int n = g.dim();
  const int P = CurlField::pair_count(n);
  CurlSpectrum out = empty_spectrum(n, g.steps() + 1, frequencies);
  for (std::size_t f = 0; f < frequencies.size(); ++f) {
    const Vec& xi = frequencies[f];
    const FrequencySystem sys = build_frequency_system(xi, data.cone(), tol);
    out.rank[f] = sys.rank;
    out.determined[f] = sys.determined() ? 1 : 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.coefficients, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(tol);
    const Eigen::Index E = sys.coefficients.rows();
    for (int m = 0; m <= g.steps(); ++m) {
      std::vector<Complex> slices(sys.directions.size());
      for (std::size_t a = 0; a < sys.directions.size(); ++a) slices[a] = slice_fourier(data, m, sys.directions[a], xi);
      Eigen::VectorXd re(E), im(E);
      for (Eigen::Index e = 0; e < E; ++e) {
        const Complex rhs = Complex(0.0, xi[sys.equation_eta[e]]) * slices[sys.equation_direction[e]];
        re(e) = rhs.real();
        im(e) = rhs.imag();
      }
      const Eigen::VectorXd xr = svd.solve(re), xim = svd.solve(im);
      for (int p = 0; p < P; ++p) out.at(m, f, p) = Complex(xr(p), xim(p));
      const double bn = std::sqrt(re.squaredNorm() + im.squaredNorm());
      if (bn > 0.0) {
        const double rn = std::sqrt((sys.coefficients * xr - re).squaredNorm() + (sys.coefficients * xim - im).squaredNorm());
        out.max_ls_residual = std::max(out.max_ls_residual, rn / bn);
      }
    }
  }
  return out;
}

CurlSpectrum curl_spectrum_of(const CurlField& h, const std::vector<Vec>& frequencies) {
  const auto& g = h.grid();
  const int P = CurlField::pair_count(g.dim());
  CurlSpectrum out = empty_spectrum(g.dim(), g.steps() + 1, frequencies);
  for (int m = 0; m <= g.steps(); ++m)
    for (int p = 0; p < P; ++p)
      for (std::size_t f = 0; f < frequencies.size(); ++f)
        out.at(m, f, p) = space_fourier_at(h.pair(p), m, frequencies[f]);
  return out;
}

double relative_spectrum_error(const CurlSpectrum& a, const CurlSpectrum& b) {
  if (a.frequencies.size() != b.frequencies.size() || a.levels != b.levels || a.dim != b.dim)
    throw std::invalid_argument("spectra are sampled differently");
  const int P = CurlField::pair_count(a.dim);
  double num = 0.0, den = 0.0;
  for (int m = 0; m < a.levels; ++m)
    for (std::size_t f = 0; f < a.frequencies.size(); ++f) {
      if (!a.determined[f] || !b.determined[f]) continue;
      for (int p = 0; p < P; ++p) {
        num += std::norm(a.at(m, f, p) - b.at(m, f, p));
        den += std::norm(b.at(m, f, p));
      }
    }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

namespace {

double l2_norm_of(const VectorField& F) {
  const auto& g = F.grid();
  double s = 0.0;
  for (int d = 0; d < g.dim(); ++d)
    for (int m = 0; m <= g.steps(); ++m)
      for (std::size_t i = 0; i < g.spatial_size(); ++i)
        s += g.time_weight(m) * g.volume_weight(i) * F.component(d).at(m, i) * F.component(d).at(m, i);
  return std::sqrt(s);
}

// cumulative trapezoid along the axes in `order`, starting from node 0
std::vector<double> integrate_slice(const VectorField& F, int level, const std::vector<int>& order) {
  const auto& g = F.grid();
  std::vector<double> phi(g.spatial_size(), 0.0);
  const double half_h = 0.5 * g.h();
  for (std::size_t stage = 0; stage < order.size(); ++stage) {
    const int axis = order[stage];
    const std::size_t s = g.stride(axis);
    const auto Fa = F.component(axis).slice(level);
    for (std::size_t node = 0; node < g.spatial_size(); ++node) {
      const Index3 idx = g.unflat(node);
      if (idx[axis] != 0) continue;
      bool start = true;
      for (std::size_t later = stage + 1; later < order.size(); ++later)
        if (idx[order[later]] != 0) start = false;
      if (!start) continue;
      std::size_t cur = node;
      for (int i = 1; i < g.nodes(); ++i) {
        phi[cur + s] = phi[cur] + half_h * (Fa[cur] + Fa[cur + s]);
        cur += s;
      }
    }
  }
  return phi;
}

}  // namespace

PotentialField poincare_potential(const VectorField& F, double curl_tolerance, double boundary_tolerance) {
  const auto& g = F.grid();
  const int n = g.dim();
  PotentialField out{ScalarField(g)};
  out.anchor = 0;
  out.curl_norm = curl_matrix(F).l2_norm();
  out.curl_tolerance = curl_tolerance >= 0.0 ? curl_tolerance : 1e-3 * l2_norm_of(F);
  if (out.curl_norm > out.curl_tolerance)
    throw CurlTooLargeError("field is not curl free: curl L2 norm " + std::to_string(out.curl_norm) +
                            " exceeds tolerance " + std::to_string(out.curl_tolerance));
  std::vector<int> forward(n), backward(n);
  for (int d = 0; d < n; ++d) {
    forward[d] = d;
    backward[d] = n - 1 - d;
  }
  for (int m = 0; m <= g.steps(); ++m) {
    if (F.time_independent() && m > 0) {
      for (std::size_t i = 0; i < g.spatial_size(); ++i) out.phi.at(m, i) = out.phi.at(0, i);
      continue;
    }
    const auto p1 = integrate_slice(F, m, forward);
    const auto p2 = integrate_slice(F, m, backward);
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
      out.phi.at(m, i) = p1[i];
      out.path_residual = std::max(out.path_residual, std::abs(p1[i] - p2[i]));
    }
  }
  const VectorField grad = gradient(out.phi);
  for (int d = 0; d < n; ++d)
    for (std::size_t i = 0; i < g.size(); ++i)
      out.gradient_residual =
          std::max(out.gradient_residual, std::abs(grad.component(d).values()[i] - F.component(d).values()[i]));
  for (int m = 0; m <= g.steps(); ++m)
    for (std::size_t i = 0; i < g.spatial_size(); ++i)
      if (g.on_boundary(i)) out.boundary_max = std::max(out.boundary_max, std::abs(out.phi.at(m, i)));
  const double btol = boundary_tolerance >= 0.0 ? boundary_tolerance : 1e-3 * out.phi.max_abs();
  out.boundary_zero = out.boundary_max <= btol;
  return out;
}

ScalarField dirichlet_potential(const VectorField& F) {
  const auto& g = F.grid();
  const int n = g.dim();
  const ScalarField div = divergence(F);
  std::vector<long> unknown(g.spatial_size(), -1);
  long count = 0;
  for (std::size_t i = 0; i < g.spatial_size(); ++i)
    if (!g.on_boundary(i)) unknown[i] = count++;
  const double inv = 1.0 / (g.h() * g.h());
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t i = 0; i < g.spatial_size(); ++i) {
    if (unknown[i] < 0) continue;
    trips.emplace_back(unknown[i], unknown[i], 2.0 * n * inv);
    for (int d = 0; d < n; ++d)
      for (long sgn : {-1L, 1L}) {
        const std::size_t nb = static_cast<std::size_t>(static_cast<long>(i) + sgn * static_cast<long>(g.stride(d)));
        if (unknown[nb] >= 0) trips.emplace_back(unknown[i], unknown[nb], -inv);
      }
  }
  Eigen::SparseMatrix<double> K(count, count);
  K.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Dirichlet Laplacian factorization failed");
  ScalarField phi(g);
  for (int m = 0; m <= g.steps(); ++m) {
    if (F.time_independent() && m > 0) {
      for (std::size_t i = 0; i < g.spatial_size(); ++i) phi.at(m, i) = phi.at(0, i);
      continue;
    }
    Eigen::VectorXd rhs(count);
    for (std::size_t i = 0; i < g.spatial_size(); ++i)
      if (unknown[i] >= 0) rhs(unknown[i]) = -div.at(m, i);
    const Eigen::VectorXd x = solver.solve(rhs);
    for (std::size_t i = 0; i < g.spatial_size(); ++i)
      if (unknown[i] >= 0) phi.at(m, i) = x(unknown[i]);
  }
  return phi;
}

DivergenceCertificate divergence_matched_recovery(const VectorField& difference, double constant) {
  const auto& g = difference.grid();
  DivergenceCertificate c{dirichlet_potential(difference), VectorField(g, difference.time_independent()), 0.0, 0.0, 0.0,
                         false, {}};
  c.recovered = gradient(c.phi);
  c.phi_max = c.phi.max_abs();
  c.phi_bound = constant * g.h() * g.h();
  const ScalarField div = divergence(difference);
  for (int m = 0; m <= g.steps(); ++m)
    for (std::size_t i = 0; i < g.spatial_size(); ++i)
      c.divergence_l2 += g.time_weight(m) * g.volume_weight(i) * div.at(m, i) * div.at(m, i);
  c.divergence_l2 = std::sqrt(c.divergence_l2);
  c.certified = c.phi_max <= c.phi_bound;
  if (c.certified) {
    c.diagnosis = "harmonic Dirichlet potential vanishes to " + std::to_string(c.phi_max) +
                  "; the convection terms coincide";
  } else {
    c.diagnosis = "divergence-free hypothesis violated: Dirichlet potential reaches " + std::to_string(c.phi_max) +
                  " > " + std::to_string(c.phi_bound) + " (div L2 " + std::to_string(c.divergence_l2) + ")";
  }
  return c;
}

bool frequency_in_aperture(const Vec& xi, const Vec& w0, double eps) {
  const double r = norm(xi);
  if (r == 0.0) return true;
  return std::abs(dot(xi, w0)) / r <= std::sin(cone_angle(eps)) + 1e-14;
}

std::vector<int> QFourierData::signed_index(std::size_t bin) const {
  std::vector<int> s(extents.size());
  for (std::size_t a = 0; a < extents.size(); ++a) {
    const int e = extents[a];
    const int j = static_cast<int>(bin % static_cast<std::size_t>(e));
    bin /= static_cast<std::size_t>(e);
    s[a] = j <= e / 2 ? j : j - e;
  }
  return s;
}

Vec QFourierData::spatial_frequency(std::size_t bin) const {
  const auto s = signed_index(bin);
  Vec xi{0.0, 0.0, 0.0};
  for (int d = 0; d < grid.dim(); ++d) xi[d] = 2.0 * pi * s[d];
  return xi;
}

double QFourierData::temporal_frequency(std::size_t bin) const {
  return 2.0 * pi * signed_index(bin).back() / grid.horizon();
}

namespace {

std::size_t periodic_total(const std::vector<int>& extents) {
  std::size_t t = 1;
  for (int e : extents) t *= static_cast<std::size_t>(e);
  return t;
}

// node of the full grid holding periodic bin position (spatial part)
std::size_t periodic_node(const SpaceTimeGrid& g, std::size_t flat_space) {
  const int n = g.dim();
  const int p = g.nodes() - 1;
  Index3 idx{0, 0, 0};
  for (int d = 0; d < n; ++d) {
    idx[d] = static_cast<int>(flat_space % static_cast<std::size_t>(p));
    flat_space /= static_cast<std::size_t>(p);
  }
  return g.flat(idx);
}

}  // namespace

QFourierData q_fourier_data(const ScalarField& q, const Vec& w0, double eps) {
  const auto& g = q.grid();
  QFourierData d;
  d.grid = g;
  d.center = w0;
  d.eps = eps;
  d.extents.assign(g.dim(), g.nodes() - 1);
  d.extents.push_back(g.steps());
  const std::size_t total = periodic_total(d.extents);
  std::size_t space = 1;
  for (int a = 0; a < g.dim(); ++a) space *= static_cast<std::size_t>(g.nodes() - 1);
  d.values.resize(total);
  for (int m = 0; m < g.steps(); ++m)
    for (std::size_t s = 0; s < space; ++s) d.values[m * space + s] = q.at(m, periodic_node(g, s));
  unitary_dft(d.values, d.extents, false);
  d.covered.assign(total, 0);
  for (std::size_t b = 0; b < total; ++b) {
    d.covered[b] = frequency_in_aperture(d.spatial_frequency(b), w0, eps) ? 1 : 0;
    if (!d.covered[b]) d.values[b] = 0.0;
  }
  return d;
}

QRecovery recover_q(const QFourierData& data, int band) {
  const auto& g = data.grid;
  QRecovery r{ScalarField(g), 0.0, {}, true};
  std::vector<Complex> v = data.values;
  std::size_t covered = 0;
  for (std::size_t b = 0; b < v.size(); ++b) {
    if (data.covered[b]) {
      ++covered;
      continue;
    }
    v[b] = 0.0;
    if (band >= 0) {
      const auto s = data.signed_index(b);
      bool inside = true;
      for (int x : s) inside = inside && std::abs(x) <= band;
      if (inside) r.uncovered_band.push_back(b);
    }
  }
  r.aperture_fraction = static_cast<double>(covered) / static_cast<double>(v.size());
  r.band_covered = r.uncovered_band.empty();
  unitary_dft(v, data.extents, true);
  std::size_t space = 1;
  for (int a = 0; a < g.dim(); ++a) space *= static_cast<std::size_t>(g.nodes() - 1);
  const int p = g.nodes() - 1;
  for (int m = 0; m <= g.steps(); ++m) {
    const int mp = m % g.steps();
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
      const Index3 idx = g.unflat(i);
      std::size_t s = 0;
      for (int d = g.dim() - 1; d >= 0; --d) s = s * static_cast<std::size_t>(p) + static_cast<std::size_t>(idx[d] % p);
      r.q.at(m, i) = v[mp * space + s].real();
    }
  }
  return r;
}

double fitted_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fitted_exponent needs two or more points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RemainderReport remainder_bound_experiment(const CoefficientPair& first, const CoefficientPair& second,
                                           const Vec& omega, double eps, const std::vector<double>& lambdas,
                                           double tau, const Vec& xi) {
  const auto& g = first.grid();
  if (second.grid() != g) throw std::invalid_argument("coefficient pairs live on different grids");
  for (std::size_t j = 1; j < lambdas.size(); ++j)
    if (!(lambdas[j] > lambdas[j - 1])) throw std::invalid_argument("non-monotone sweep: lambda values must increase");
  RemainderReport rep;
  rep.omega = omega;
  rep.eps = eps;
  const BoundaryRegion G(g.dim(), RegionKind::NeighborhoodG, omega, eps);
  rep.faces = G.faces().complement(g.dim());
  if (rep.faces.empty()) throw std::invalid_argument("Sigma \\ G is empty for this direction and eps");
  const auto samples = boundary_samples(g, rep.faces);
  const auto faces = box_faces(g.dim());
  const TimeCutoff chi{g.horizon()};

  std::vector<double> lam, term, trace, source;
  for (double lambda : lambdas) {
    const CarlemanWeight w(lambda, omega, g.dim());
    const GOSolution grow = build_go_solution(GOKind::Growing, second, w, tau, xi, chi);
    const GOSolution decay = build_go_solution(GOKind::Decaying, first, w, 0.0, {0.0, 0.0, 0.0}, chi);
    const ComplexField U = grow.amplitude + grow.remainder;
    const ComplexField V = decay.amplitude + decay.remainder;
    const StepperCoefficients co = operator_coefficients(first, TimeDirection::Forward, lambda, omega);
    HalfStepField src = cn_residual(co, U);
    RemainderRow row;
    row.lambda = lambda;
    row.source_norm = half_step_l2(src);
    for (auto& v : src.values) v = -v;
    const ComplexField z = cn_solve(co, ComplexField(g), &src);
    double tr = 0.0;
    for (int m = 0; m <= g.steps(); ++m) {
      const auto zs = z.slice(m);
      for (const auto& s : samples) {
        const Complex dn = normal_derivative<Complex>(g, zs, s.node, faces[s.face]);
        const double wt = g.time_weight(m) * s.weight;
        row.boundary_term += wt * dn * std::conj(V.at(m, s.node));
        tr += wt * std::norm(dn);
      }
    }
    row.trace_norm = std::sqrt(tr);
    rep.rows.push_back(row);
    lam.push_back(lambda);
    term.push_back(std::max(std::abs(row.boundary_term), 1e-300));
    trace.push_back(std::max(row.trace_norm, 1e-300));
    source.push_back(std::max(row.source_norm, 1e-300));
  }
  if (lam.size() >= 2) {
    rep.exponent = fitted_exponent(lam, term);
    rep.trace_exponent = fitted_exponent(lam, trace);
    rep.source_exponent = fitted_exponent(lam, source);
  }
  rep.passed = lam.size() >= 2 && rep.exponent <= 0.7;
  return rep;
}

}  // namespace cdlab
