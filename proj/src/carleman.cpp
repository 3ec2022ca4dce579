#include "cdlab/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "cdlab/diffops.hpp"
#include "cdlab/quadrature.hpp"

namespace cdlab {

using std::numbers::pi;

namespace {

struct SpacePoint {
  Vec x;
  double w;
};

struct FacePoint {
  Vec x;
  double w;
  Vec nu;
};

constexpr int kGaussPerCell = 3;
constexpr int kGaussPerPanel = 8;

std::vector<SpacePoint> cell_points(const SpaceTimeGrid& g) {
  const GaussRule gr = gauss_legendre(kGaussPerCell);
  const int n = g.dim(), cells = g.nodes() - 1;
  const double h = g.h();
  std::vector<SpacePoint> pts;
  Index3 c{0, 0, 0}, q{0, 0, 0};
  const int nc3 = n == 3 ? cells : 1, nq3 = n == 3 ? kGaussPerCell : 1;
  for (c[2] = 0; c[2] < nc3; ++c[2])
    for (c[1] = 0; c[1] < cells; ++c[1])
      for (c[0] = 0; c[0] < cells; ++c[0])
        for (q[2] = 0; q[2] < nq3; ++q[2])
          for (q[1] = 0; q[1] < kGaussPerCell; ++q[1])
            for (q[0] = 0; q[0] < kGaussPerCell; ++q[0]) {
              SpacePoint p{{0.0, 0.0, 0.0}, 1.0};
              for (int d = 0; d < n; ++d) {
                p.x[d] = (c[d] + gr.nodes[q[d]]) * h;
                p.w *= h * gr.weights[q[d]];
              }
              pts.push_back(p);
            }
  return pts;
}

std::vector<FacePoint> face_points(const SpaceTimeGrid& g) {
  const GaussRule gr = gauss_legendre(kGaussPerCell);
  const int n = g.dim(), cells = g.nodes() - 1;
  const double h = g.h();
  std::vector<FacePoint> pts;
  for (int axis = 0; axis < n; ++axis)
    for (int side = 0; side < 2; ++side) {
      int other[2] = {-1, -1}, k = 0;
      for (int d = 0; d < n; ++d)
        if (d != axis) other[k++] = d;
      const int c1 = n == 3 ? cells : 1, q1 = n == 3 ? kGaussPerCell : 1;
      for (int a = 0; a < cells; ++a)
        for (int b = 0; b < c1; ++b)
          for (int qa = 0; qa < kGaussPerCell; ++qa)
            for (int qb = 0; qb < q1; ++qb) {
              FacePoint p{{0.0, 0.0, 0.0}, h * gr.weights[qa], {0.0, 0.0, 0.0}};
              p.x[axis] = side;
              p.nu[axis] = side == 0 ? -1.0 : 1.0;
              p.x[other[0]] = (a + gr.nodes[qa]) * h;
              if (n == 3) {
                p.x[other[1]] = (b + gr.nodes[qb]) * h;
                p.w *= h * gr.weights[qb];
              }
              pts.push_back(p);
            }
    }
  return pts;
}

// Coefficients reconstructed at the quadrature points, one block per stored level.
struct PointCoefficients {
  int levels = 1;
  std::vector<Vec> A;  // levels x points
  std::vector<double> q_tilde;
};

PointCoefficients point_coefficients(const CoefficientPair& c, const std::vector<SpacePoint>& pts) {
  const auto& g = c.grid();
  PointCoefficients pc;
  pc.levels = c.time_independent() ? 1 : g.steps() + 1;
  pc.A.resize(pc.levels * pts.size());
  pc.q_tilde.resize(pc.levels * pts.size());
  for (int m = 0; m < pc.levels; ++m) {
    const auto qs = c.q_tilde().slice(m);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      Vec a{0.0, 0.0, 0.0};
      for (int d = 0; d < g.dim(); ++d) a[d] = interpolate(g, c.convection().component(d).slice(m), pts[i].x);
      pc.A[m * pts.size() + i] = a;
      pc.q_tilde[m * pts.size() + i] = interpolate(g, qs, pts[i].x);
    }
  }
  return pc;
}

// Largest value of -2 lambda w . x over the closed box.
double weight_shift(double lambda, const Vec& omega, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) s += std::max(0.0, -omega[d]);
  return 2.0 * lambda * s;
}

void require_unit(const Vec& omega, int dim) {
  CarlemanWeight(1.0, omega, dim);
}

}  // namespace

OperatorSplit split_operator(const CoefficientPair& c, const CarlemanWeight& weight, const ComplexField& v) {
  const auto& g = c.grid();
  if (v.grid() != g) throw std::invalid_argument("test field and coefficients live on different grids");
  for (std::size_t i = 0; i < g.spatial_size(); ++i)
    if (g.on_boundary(i))
      for (int m = 0; m <= g.steps(); ++m)
        if (std::abs(v.at(m, i)) > 1e-14) throw std::invalid_argument("split_operator: v must vanish on the lateral boundary");
  OperatorSplit out{HalfStepField(g), HalfStepField(g), HalfStepField(g)};
  const double k = g.k();
  const double lambda = weight.lambda();
  const Vec& w = weight.omega();
  auto p3_at = [&](int m, std::size_t i) {
    const auto s = v.slice(m);
    const Vec a = c.convection().at(m, i);
    Complex acc = (c.q_tilde().at(m, i) - 2.0 * lambda * dot(w, a)) * s[i];
    for (int d = 0; d < g.dim(); ++d) acc -= 2.0 * a[d] * axis_derivative(g, s, i, d);
    return acc;
  };
  for (int m = 0; m < g.steps(); ++m) {
    const auto s0 = v.slice(m), s1 = v.slice(m + 1);
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
      if (g.on_boundary(i)) continue;
      out.p1.at(m, i) = -0.5 * (slice_laplacian(g, s0, i) + slice_laplacian(g, s1, i));
      out.p2.at(m, i) = (s1[i] - s0[i]) / k - lambda * (directional_derivative(g, s0, i, w) + directional_derivative(g, s1, i, w));
      out.p3.at(m, i) = 0.5 * (p3_at(m, i) + p3_at(m + 1, i));
    }
  }
  return out;
}

OperatorSplit split_operator(const CoefficientPair& c, const CarlemanWeight& weight, const ScalarField& v) {
  return split_operator(c, weight, to_complex(v));
}

double CarlemanTestFunction::p(double t) const {
  if (profile == TimeProfile::Square) return (t / horizon) * (t / horizon);
  const double s = std::sin(0.5 * pi * t / horizon);
  return s * s;
}

double CarlemanTestFunction::dp(double t) const {
  if (profile == TimeProfile::Square) return 2.0 * t / (horizon * horizon);
  return 0.5 * pi / horizon * std::sin(pi * t / horizon);
}

double CarlemanTestFunction::shape(const Vec& x) const {
  double w = 1.0, r2 = 0.0;
  for (int d = 0; d < dim; ++d) {
    w *= x[d] * (1.0 - x[d]);
    r2 += (x[d] - center[d]) * (x[d] - center[d]);
  }
  return amplitude * w * std::exp(-r2 / (2.0 * width * width));
}

Vec CarlemanTestFunction::shape_gradient(const Vec& x) const {
  const double s2 = width * width;
  double r2 = 0.0;
  for (int d = 0; d < dim; ++d) r2 += (x[d] - center[d]) * (x[d] - center[d]);
  const double G = std::exp(-r2 / (2.0 * s2));
  Vec g{0.0, 0.0, 0.0};
  for (int d = 0; d < dim; ++d) {
    double others = 1.0;
    for (int e = 0; e < dim; ++e)
      if (e != d) others *= x[e] * (1.0 - x[e]);
    const double wd = x[d] * (1.0 - x[d]);
    g[d] = amplitude * others * G * ((1.0 - 2.0 * x[d]) - wd * (x[d] - center[d]) / s2);
  }
  return g;
}

double CarlemanTestFunction::shape_laplacian(const Vec& x) const {
  const double s2 = width * width;
  double r2 = 0.0;
  for (int d = 0; d < dim; ++d) r2 += (x[d] - center[d]) * (x[d] - center[d]);
  const double G = std::exp(-r2 / (2.0 * s2));
  double lap = 0.0;
  for (int d = 0; d < dim; ++d) {
    double others = 1.0;
    for (int e = 0; e < dim; ++e)
      if (e != d) others *= x[e] * (1.0 - x[e]);
    const double wd = x[d] * (1.0 - x[d]);
    const double dwd = 1.0 - 2.0 * x[d];
    const double y = x[d] - center[d];
    // d^2 (w G) = w'' G + 2 w' G' + w G''
    lap += others * G * (-2.0 - 2.0 * dwd * y / s2 + wd * (y * y / (s2 * s2) - 1.0 / s2));
  }
  return amplitude * lap;
}

std::vector<CarlemanTestFunction> carleman_test_suite(int dim, double horizon) {
  const std::vector<Vec> centers{{0.5, 0.5, 0.5}, {0.3, 0.6, 0.4}, {0.7, 0.35, 0.6}};
  const std::vector<double> widths{0.15, 0.3};
  std::vector<CarlemanTestFunction> suite;
  for (std::size_t ci = 0; ci < centers.size(); ++ci)
    for (double w : widths)
      for (TimeProfile p : {TimeProfile::Square, TimeProfile::SineSquare}) {
        CarlemanTestFunction f;
        f.dim = dim;
        f.horizon = horizon;
        f.center = centers[ci];
        f.width = w;
        f.profile = p;
        std::ostringstream name;
        name << "c" << ci << "-w" << w << (p == TimeProfile::Square ? "-sq" : "-sin");
        f.name = name.str();
        suite.push_back(f);
      }
  return suite;
}

void validate_test_field(const ComplexField& u, double tolerance) {
  const auto& g = u.grid();
  for (std::size_t i = 0; i < g.spatial_size(); ++i)
    if (std::abs(u.at(0, i)) > tolerance) throw std::invalid_argument("test function violates u(0,.) = 0");
  for (int m = 0; m <= g.steps(); ++m)
    for (std::size_t i = 0; i < g.spatial_size(); ++i)
      if (g.on_boundary(i) && std::abs(u.at(m, i)) > tolerance)
        throw std::invalid_argument("test function violates u = 0 on the lateral boundary");
}

void validate_test_function(const CarlemanTestFunction& u, const SpaceTimeGrid& g, double tolerance) {
  ComplexField f(g);
  for (int m = 0; m <= g.steps(); ++m)
    for (std::size_t i = 0; i < g.spatial_size(); ++i) f.at(m, i) = u.value(g.time(m), g.coord(i));
  try {
    validate_test_field(f, tolerance);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(u.name + ": " + e.what());
  }
}

CarlemanReport check_boundary_estimate(const CoefficientPair& c, const Vec& omega, const std::vector<double>& lambdas,
                                       const std::vector<CarlemanTestFunction>& suite) {
  const auto& g = c.grid();
  require_unit(omega, g.dim());
  for (std::size_t j = 1; j < lambdas.size(); ++j)
    if (!(lambdas[j] > lambdas[j - 1])) throw std::invalid_argument("lambda sweep must be strictly increasing");
  for (const auto& u : suite) validate_test_function(u, g);

  CarlemanReport rep;
  rep.omega = omega;
  rep.lambdas = lambdas;
  const auto pts = cell_points(g);
  const auto fpts = face_points(g);
  const PointCoefficients pc = point_coefficients(c, pts);
  const int levels = pc.levels;
  const double T = g.horizon();
  const std::size_t np = pts.size();

  for (const auto& u : suite) {
    rep.members.push_back(u.name);
    std::vector<double> S(np), GG(np), K(levels * np);
    for (std::size_t i = 0; i < np; ++i) {
      S[i] = u.shape(pts[i].x);
      const Vec gr = u.shape_gradient(pts[i].x);
      GG[i] = dot(gr, gr);
      const double lap = u.shape_laplacian(pts[i].x);
      for (int m = 0; m < levels; ++m) {
        const std::size_t k = m * np + i;
        K[k] = -lap - 2.0 * dot(pc.A[k], gr) + pc.q_tilde[k] * S[i];
      }
    }
    std::vector<double> dn(fpts.size());
    for (std::size_t i = 0; i < fpts.size(); ++i) dn[i] = dot(u.shape_gradient(fpts[i].x), fpts[i].nu);

    for (double lambda : lambdas) {
      const double shift = weight_shift(lambda, omega, g.dim());
      // spatial moments with weight e^{-2 lambda w.x - shift} <= 1
      double mSS = 0.0, mGG = 0.0, plus = 0.0, minus = 0.0;
      std::vector<double> mSK(levels, 0.0), mKK(levels, 0.0), mKK1(levels, 0.0);
      for (std::size_t i = 0; i < np; ++i) {
        const double e = pts[i].w * std::exp(-2.0 * lambda * dot(omega, pts[i].x) - shift);
        mSS += e * S[i] * S[i];
        mGG += e * GG[i];
        for (int m = 0; m < levels; ++m) {
          const double km = K[m * np + i];
          mSK[m] += e * S[i] * km;
          mKK[m] += e * km * km;
          if (m + 1 < levels) mKK1[m] += e * km * K[(m + 1) * np + i];
        }
      }
      for (std::size_t i = 0; i < fpts.size(); ++i) {
        const double wn = dot(omega, fpts[i].nu);
        const double e = fpts[i].w * std::exp(-2.0 * lambda * dot(omega, fpts[i].x) - shift) * dn[i] * dn[i];
        if (wn > 0.0) plus += e * wn;
        if (wn < 0.0) minus -= e * wn;
      }

      std::array<LogSum, 6> terms;
      const auto rule = graded_time_rule(T, 1.0 / (8.0 * lambda * lambda), kGaussPerPanel);
      for (const auto& tn : rule) {
        const double lt = std::log(tn.weight) - 2.0 * lambda * lambda * tn.t + shift;
        const double p = u.p(tn.t), dp = u.dp(tn.t);
        double sk = mSK[0], kk = mKK[0];
        if (levels > 1) {
          const double pos = std::min(tn.t / g.k(), static_cast<double>(g.steps()) - 1e-12);
          const int m = std::min(static_cast<int>(pos), g.steps() - 1);
          const double th = pos - m;
          sk = (1.0 - th) * mSK[m] + th * mSK[m + 1];
          kk = (1.0 - th) * (1.0 - th) * mKK[m] + 2.0 * th * (1.0 - th) * mKK1[m] + th * th * mKK[m + 1];
        }
        terms[0].add_log(lt + log_term(lambda * lambda * p * p, mSS));
        terms[1].add_log(lt + log_term(p * p, mGG));
        terms[3].add_log(lt + log_term(lambda * p * p, plus));
        // |p' S + p K|^2 expanded; clamp the tiny negative values cancellation can leave
        terms[4].add_log(lt + log_term(1.0, std::max(0.0, dp * dp * mSS + 2.0 * p * dp * sk + p * p * kk)));
        terms[5].add_log(lt + log_term(lambda * p * p, minus));
      }
      terms[2].add_log(-2.0 * lambda * lambda * T + shift + log_term(u.p(T) * u.p(T), mSS));

      CarlemanRow row;
      row.member = u.name;
      row.lambda = lambda;
      LogSum lhs, rhs;
      for (int j = 0; j < 6; ++j) {
        row.log_terms[j] = terms[j].log();
        (j < 4 ? lhs : rhs).add(terms[j]);
      }
      row.ratio = lhs.log() == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(lhs.log() - rhs.log());
      row.leading_ratio = row.log_terms[0] == -std::numeric_limits<double>::infinity()
                              ? 0.0
                              : std::exp(row.log_terms[0] - row.log_terms[4]);
      if (!std::isfinite(row.ratio) || !std::isfinite(row.leading_ratio)) rep.finite = false;
      rep.rows.push_back(row);
    }
  }

  // onset: smallest sweep index from which every member's ratios are nonincreasing
  const std::size_t L = lambdas.size();
  std::size_t onset = 0;
  for (std::size_t mi = 0; mi < suite.size(); ++mi)
    for (std::size_t j = L; j-- > 1;)
      if (rep.row(mi, j).ratio > rep.row(mi, j - 1).ratio * (1.0 + 1e-12)) {
        onset = std::max(onset, j);
        break;
      }
  rep.onset_lambda = L ? lambdas[std::min(onset, L - 1)] : 0.0;
  for (std::size_t mi = 0; mi < suite.size(); ++mi)
    for (std::size_t j = 0; j < L; ++j) {
      const auto& r = rep.row(mi, j);
      if (j >= onset) rep.c_hat = std::max(rep.c_hat, r.ratio);
      rep.leading_ratio_max = std::max(rep.leading_ratio_max, r.leading_ratio);
    }
  // the trend must be established on at least two sweep steps
  rep.passed = rep.finite && std::isfinite(rep.c_hat) && L >= 3 && onset + 3 <= L;
  return rep;
}

double check_p2_lower_bound(const CarlemanWeight& weight, const CarlemanTestFunction& v, const SpaceTimeGrid& g) {
  validate_test_function(v, g);
  const auto pts = cell_points(g);
  const double lambda = weight.lambda();
  const Vec& w = weight.omega();
  double SS = 0.0, SW = 0.0, WW = 0.0;
  for (const auto& p : pts) {
    const double s = v.shape(p.x);
    const double ws = dot(w, v.shape_gradient(p.x));
    SS += p.w * s * s;
    SW += p.w * s * ws;
    WW += p.w * ws * ws;
  }
  double pp = 0.0, ppd = 0.0, dd = 0.0;
  for (const auto& tn : uniform_time_rule(g.horizon(), 16, kGaussPerPanel)) {
    const double p = v.p(tn.t), dp = v.dp(tn.t);
    pp += tn.weight * p * p;
    ppd += tn.weight * p * dp;
    dd += tn.weight * dp * dp;
  }
  const double vv = pp * SS;
  if (vv == 0.0) return 0.0;
  const double p2 = dd * SS - 4.0 * lambda * ppd * SW + 4.0 * lambda * lambda * pp * WW;
  const double R = g.enclosing_radius();
  return p2 / ((1.0 + 4.0 * lambda * lambda) / (16.0 * R * R) * vv);
}

CrossTermIdentity check_cross_term_identity(const CarlemanWeight& weight, const CarlemanTestFunction& v,
                                            const SpaceTimeGrid& g) {
  validate_test_function(v, g);
  const double lambda = weight.lambda();
  const Vec& w = weight.omega();
  double SL = 0.0, LW = 0.0, GG = 0.0, flux = 0.0;
  for (const auto& p : cell_points(g)) {
    const Vec gr = v.shape_gradient(p.x);
    const double lap = v.shape_laplacian(p.x);
    SL += p.w * v.shape(p.x) * lap;
    LW += p.w * lap * dot(w, gr);
    GG += p.w * dot(gr, gr);
  }
  for (const auto& p : face_points(g)) {
    const double dn = dot(v.shape_gradient(p.x), p.nu);
    flux += p.w * dot(w, p.nu) * dn * dn;
  }
  double pp = 0.0, ppd = 0.0;
  for (const auto& tn : uniform_time_rule(g.horizon(), 16, kGaussPerPanel)) {
    pp += tn.weight * v.p(tn.t) * v.p(tn.t);
    ppd += tn.weight * v.p(tn.t) * v.dp(tn.t);
  }
  CrossTermIdentity out;
  // 2 int (-Lap v)(d_t v - 2 lambda w.grad v)
  out.cross_term = -2.0 * ppd * SL + 4.0 * lambda * pp * LW;
  const double pT = v.p(g.horizon());
  out.final_gradient = pT * pT * GG;
  out.boundary_flux = pp * flux;
  const double scale = std::max(std::abs(out.cross_term), out.final_gradient);
  if (scale > 0.0) {
    out.defect = std::abs(out.cross_term - out.final_gradient - 2.0 * lambda * out.boundary_flux) / scale;
    out.defect_unit_coefficient = std::abs(out.cross_term - out.final_gradient - lambda * out.boundary_flux) / scale;
  }
  return out;
}

void write_carleman_csv(std::ostream& os, const CarlemanReport& r) {
  os << "member,lambda,log_term1,log_term2,log_term3,log_term4,log_term5,log_term6,ratio\n";
  os << std::setprecision(17);
  for (const auto& row : r.rows) {
    os << row.member << "," << row.lambda;
    for (double t : row.log_terms) os << "," << t;
    os << "," << row.ratio << "\n";
  }
}

}  // namespace cdlab
