#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdlab/boundary.hpp"
#include "cdlab/coefficients.hpp"
#include "cdlab/ray_transform.hpp"

namespace cdlab {

/// h_ij = d_j F_i - d_i F_j, stored as the upper triangle (i < j) only, so
/// h_ii = 0 and h_ji = -h_ij hold by construction.
class CurlField {
 public:
  explicit CurlField(const SpaceTimeGrid& grid);

  static int pair_count(int dim) { return dim * (dim - 1) / 2; }
  /// Position of (i, j), i < j, in the order (0,1), (0,2), (1,2).
  static int pair_index(int i, int j, int dim) { return i * (2 * dim - i - 1) / 2 + (j - i - 1); }

  const SpaceTimeGrid& grid() const { return grid_; }
  ScalarField& pair(int p) { return pairs_.at(p); }
  const ScalarField& pair(int p) const { return pairs_.at(p); }
  double at(int level, std::size_t node, int i, int j) const;
  double max_abs() const;
  /// Space-time trapezoid L2 norm of the full matrix field.
  double l2_norm() const;

 private:
  SpaceTimeGrid grid_;
  std::vector<ScalarField> pairs_;
};

CurlField curl_matrix(const VectorField& F);

class ApertureError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Orthogonal matrix whose first row is d xi / d phi_1 and whose second row is
/// xi(phi_1, theta) from the spherical parametrization
///   n = 2: xi = (sin phi_1, cos phi_1),
///   n = 3: xi = (sin phi_1 cos theta, cos phi_1, sin phi_1 sin theta);
/// in 3D the third row is (-sin theta, 0, cos theta).
Eigen::MatrixXd frequency_rotation(double phi1, double theta, int dim);
/// Same for the angles of xi / |xi|; xi must be nonzero.
Eigen::MatrixXd frequency_rotation(const Vec& xi, int dim);

/// The linear relations that cone data impose on the spectral curl at one
/// frequency: for every cone direction w with |w . xi/|xi|| <= tol and every
/// basis vector eta = e_k, sum_{i<j} (w^i eta_j - w^j eta_i) h_ij(xi) equals
/// i (eta . xi) times the Fourier slice of the data in direction w. Rows with
/// vanishing coefficients are dropped.
struct FrequencySystem {
  Vec xi{0.0, 0.0, 0.0};
  int dim = 2;
  Eigen::MatrixXd rotation;  // rotation * xi/|xi| = e_2
  Eigen::MatrixXd reduced;   // rotation without its second row
  int reduced_rank = 0;
  std::vector<std::size_t> directions;  // cone indices orthogonal to xi
  std::vector<std::size_t> equation_direction;  // position in `directions`
  std::vector<int> equation_eta;
  Eigen::MatrixXd coefficients;  // equations x pair_count
  int rank = 0;
  bool determined() const { return rank == CurlField::pair_count(dim); }
};

/// Throws ApertureError("frequency outside aperture ...") when no cone
/// direction is orthogonal to xi.
FrequencySystem build_frequency_system(const Vec& xi, const DirectionCone& cone, double tol = 1e-10);

/// Directions rotation^T (cos a e_1 + sin a e_3) (3D) or rotation^T e_1 (2D),
/// all orthogonal to the frequency that produced the rotation.
std::vector<Vec> rotated_perturbations(const Eigen::MatrixXd& rotation, const std::vector<double>& angles);

/// Frequencies reachable from the sampled cone: in 2D the lines orthogonal to
/// each direction, in 3D the lines along w_a x w_b for every pair of
/// directions, sampled at step * j for j = 1..radial. xi = 0 is left out
/// (the spectral curl of a compactly supported field vanishes there).
std::vector<Vec> aperture_frequencies(const DirectionCone& cone, int radial, double step);

/// Spectral curl h^_ij(t, xi) = int h_ij(t, x) e^{-i xi . x} dx on a list of
/// frequencies, with per-frequency rank flags.
struct CurlSpectrum {
  int dim = 2;
  int levels = 0;
  std::vector<Vec> frequencies;
  std::vector<Complex> values;  // (level, frequency, pair)
  std::vector<int> rank;
  std::vector<char> determined;
  double max_ls_residual = 0.0;  // relative least-squares residual, worst cell

  Complex& at(int level, std::size_t f, int p) { return values[index(level, f, p)]; }
  Complex at(int level, std::size_t f, int p) const { return values[index(level, f, p)]; }
  /// Antisymmetric access; zero on the diagonal.
  Complex entry(int level, std::size_t f, int i, int j) const;
  std::size_t determined_count() const;
  /// l2 norm over determined frequencies, all levels and pairs.
  double l2_norm() const;

 private:
  std::size_t index(int level, std::size_t f, int p) const {
    const std::size_t P = static_cast<std::size_t>(CurlField::pair_count(dim));
    return (static_cast<std::size_t>(level) * frequencies.size() + f) * P + static_cast<std::size_t>(p);
  }
};

/// Least-squares solve of every frequency system with Fourier-sliced ray data
/// as right-hand sides (minimum-norm, SVD threshold `tol`). Rank-deficient
/// frequencies keep their minimum-norm values and are flagged.
CurlSpectrum recover_curl_spectrum(const RayData& data, const std::vector<Vec>& frequencies, double tol = 1e-10);

/// Direct trapezoid Fourier sums of a sampled curl on the same frequencies.
CurlSpectrum curl_spectrum_of(const CurlField& h, const std::vector<Vec>& frequencies);

/// ||a - b|| / ||b|| over cells determined in both.
double relative_spectrum_error(const CurlSpectrum& a, const CurlSpectrum& b);

class CurlTooLargeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct PotentialField {
  ScalarField phi;
  std::size_t anchor = 0;        // pinned node (value 0)
  double curl_norm = 0.0;        // L2 norm of curl_matrix(F)
  double curl_tolerance = 0.0;
  double path_residual = 0.0;    // max |phi_path1 - phi_path2|
  double gradient_residual = 0.0;  // max |grad phi - F|
  double boundary_max = 0.0;     // max |phi| on the boundary nodes
  bool boundary_zero = false;    // boundary_max <= boundary tolerance
};

/// Axis-ordered trapezoid line integration from the lowest-index boundary
/// node; the second path visits the axes in reverse order. Refuses with
/// CurlTooLargeError when the curl exceeds `curl_tolerance` (a negative value
/// selects 1e-3 times the L2 norm of F).
PotentialField poincare_potential(const VectorField& F, double curl_tolerance = -1.0,
                                  double boundary_tolerance = -1.0);

/// Solves Lap phi = div F with phi = 0 on the boundary, slice by slice
/// (5- or 7-point stencil, sparse Cholesky).
ScalarField dirichlet_potential(const VectorField& F);

struct DivergenceCertificate {
  ScalarField phi;              // Dirichlet-Laplace potential of the difference
  VectorField recovered;        // grad phi: the certified difference
  double phi_max = 0.0;
  double phi_bound = 0.0;       // constant * h^2
  double divergence_l2 = 0.0;
  bool certified = false;
  std::string diagnosis;
};

/// Full recovery under matching divergences: the difference of two convection
/// terms is a gradient of a boundary-vanishing potential, which then solves
/// the Dirichlet Laplace problem. certified iff max |phi| <= constant * h^2;
/// otherwise the diagnosis reports a violated divergence hypothesis.
DivergenceCertificate divergence_matched_recovery(const VectorField& difference, double constant = 1.0);

/// Cone aperture for space-time Fourier data of q: xi = 0 or
/// |xi/|xi| . w0| <= sin(2 asin(eps/2)).
bool frequency_in_aperture(const Vec& xi, const Vec& w0, double eps);

/// Unitary DFT samples of a scalar on the periodic grid (levels 0..M-1, nodes
/// 0..N-2 per axis; the last level and node repeat the first), keeping only
/// covered bins. Axis order: space axes fastest, time last.
struct QFourierData {
  SpaceTimeGrid grid{2, 8, 8, 1.0};
  std::vector<int> extents;
  std::vector<Complex> values;  // zero on uncovered bins
  std::vector<char> covered;
  Vec center{1.0, 0.0, 0.0};
  double eps = 0.1;

  /// Signed bin index per axis (time last) and its angular frequency.
  std::vector<int> signed_index(std::size_t bin) const;
  Vec spatial_frequency(std::size_t bin) const;
  double temporal_frequency(std::size_t bin) const;
};

QFourierData q_fourier_data(const ScalarField& q, const Vec& w0, double eps);

struct QRecovery {
  ScalarField q;
  double aperture_fraction = 0.0;          // covered bins / all bins
  std::vector<std::size_t> uncovered_band;  // in-band bins missing from the data
  bool band_covered = true;
};

/// Inverse DFT of the covered bins. Bins with every signed index inside
/// `band` (negative: no band check) are checked for coverage.
QRecovery recover_q(const QFourierData& data, int band = -1);

/// Boundary term of the integral identity for one lambda. z = e^{-phi}(u_1 - u_2)
/// solves the conjugated problem of the first pair with source
/// -L_phi(B_g + R_g), zero lateral data and z(0) = 0, so d_nu u conj(v) on the
/// boundary reduces to d_nu z conj(B_d + R_d).
struct RemainderRow {
  double lambda = 0.0;
  Complex boundary_term;    // int_{Sigma \ G} d_nu z conj(B_d + R_d)
  double trace_norm = 0.0;  // ||d_nu z||_{L2(Sigma \ G)}
  double source_norm = 0.0;  // ||L_phi(B_g + R_g)||, the weighted right side
};

struct RemainderReport {
  Vec omega{1.0, 0.0, 0.0};
  double eps = 0.0;
  FaceSet faces;  // Sigma \ G
  std::vector<RemainderRow> rows;
  double exponent = 0.0;         // fitted slope of log |boundary term| against log lambda
  double trace_exponent = 0.0;
  double source_exponent = 0.0;
  bool passed = false;           // exponent <= 0.7
};

/// The growing solution is built for `second`, the decaying one and z for `first`.
RemainderReport remainder_bound_experiment(const CoefficientPair& first, const CoefficientPair& second,
                                           const Vec& omega, double eps, const std::vector<double>& lambdas,
                                           double tau = 0.0, const Vec& xi = {0.0, 0.0, 0.0});

/// Least-squares slope of log y against log x.
double fitted_exponent(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cdlab
