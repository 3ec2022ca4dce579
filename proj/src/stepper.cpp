#include "cdlab/stepper.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>

namespace cdlab {

namespace {

// Applies Lap + b.grad + c at an interior node.
Complex apply_interior(const SpaceTimeGrid& g, std::span<const Complex> u, std::size_t i, const Vec& b, double c) {
  const double h = g.h();
  const double ih2 = 1.0 / (h * h);
  Complex acc = c * u[i];
  for (int d = 0; d < g.dim(); ++d) {
    const std::size_t s = g.stride(d);
    acc += (u[i + s] - 2.0 * u[i] + u[i - s]) * ih2 + b[d] * (u[i + s] - u[i - s]) * (0.5 / h);
  }
  return acc;
}

struct InteriorMap {
  std::vector<int> index;  // node -> unknown or -1
  std::vector<std::size_t> nodes;
};

InteriorMap interior_map(const SpaceTimeGrid& g) {
  InteriorMap m;
  m.index.assign(g.spatial_size(), -1);
  for (std::size_t i = 0; i < g.spatial_size(); ++i)
    if (!g.on_boundary(i)) {
      m.index[i] = static_cast<int>(m.nodes.size());
      m.nodes.push_back(i);
    }
  return m;
}

Eigen::SparseMatrix<double> assemble(const StepperCoefficients& co, const InteriorMap& map, int level) {
  const auto& g = co.grid;
  const double h = g.h();
  const double half_k = 0.5 * g.k();
  const double ih2 = 1.0 / (h * h);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(map.nodes.size() * (1 + 2 * g.dim()));
  for (std::size_t r = 0; r < map.nodes.size(); ++r) {
    const std::size_t i = map.nodes[r];
    const Vec& b = co.b(level, i);
    trips.emplace_back(r, r, 1.0 - half_k * (co.c(level, i) - 2.0 * g.dim() * ih2));
    for (int d = 0; d < g.dim(); ++d) {
      const std::size_t s = g.stride(d);
      const int jp = map.index[i + s], jm = map.index[i - s];
      if (jp >= 0) trips.emplace_back(r, jp, -half_k * (ih2 + 0.5 * b[d] / h));
      if (jm >= 0) trips.emplace_back(r, jm, -half_k * (ih2 - 0.5 * b[d] / h));
    }
  }
  Eigen::SparseMatrix<double> A(map.nodes.size(), map.nodes.size());
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

}  // namespace

StepperCoefficients operator_coefficients(const CoefficientPair& c, TimeDirection dir, double lambda, const Vec& omega) {
  const auto& g = c.grid();
  StepperCoefficients co;
  co.grid = g;
  co.time_independent = c.time_independent();
  const int levels = co.time_independent ? 1 : g.steps() + 1;
  co.drift.resize(levels * g.spatial_size());
  co.reaction.resize(levels * g.spatial_size());
  const Vec lw = lambda * omega;
  for (int m = 0; m < levels; ++m) {
    // the adjoint runs in reversed time
    const int src = (dir == TimeDirection::Adjoint && !co.time_independent) ? g.steps() - m : m;
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
      const Vec a = c.convection().at(src, i);
      const double wa = 2.0 * dot(lw, a);
      const std::size_t k = m * g.spatial_size() + i;
      if (dir == TimeDirection::Forward) {
        co.drift[k] = 2.0 * (a + lw);
        co.reaction[k] = wa - c.q_tilde().at(src, i);
      } else {
        co.drift[k] = -2.0 * (a + lw);
        co.reaction[k] = wa - c.q_tilde_star().at(src, i);
      }
    }
  }
  return co;
}

HalfStepField half_step_average(const ComplexField& f) {
  const auto& g = f.grid();
  HalfStepField out(g);
  for (int m = 0; m < g.steps(); ++m)
    for (std::size_t i = 0; i < g.spatial_size(); ++i) out.at(m, i) = 0.5 * (f.at(m, i) + f.at(m + 1, i));
  return out;
}

double half_step_l2(const HalfStepField& f) {
  const auto& g = f.grid;
  const double w = g.k() * std::pow(g.h(), g.dim());
  double acc = 0.0;
  for (int m = 0; m < g.steps(); ++m)
    for (std::size_t i = 0; i < g.spatial_size(); ++i)
      if (!g.on_boundary(i)) acc += w * std::norm(f.at(m, i));
  return std::sqrt(acc);
}

ComplexField reverse_time(const ComplexField& f) {
  const auto& g = f.grid();
  ComplexField out(g);
  for (int m = 0; m <= g.steps(); ++m)
    for (std::size_t i = 0; i < g.spatial_size(); ++i) out.at(m, i) = f.at(g.steps() - m, i);
  return out;
}

HalfStepField reverse_time(const HalfStepField& f) {
  const auto& g = f.grid;
  HalfStepField out(g);
  for (int m = 0; m < g.steps(); ++m)
    for (std::size_t i = 0; i < g.spatial_size(); ++i) out.at(m, i) = f.at(g.steps() - 1 - m, i);
  return out;
}

HalfStepField cn_residual(const StepperCoefficients& co, const ComplexField& u, const HalfStepField* source) {
  const auto& g = co.grid;
  if (u.grid() != g) throw std::invalid_argument("cn_residual: field and coefficients live on different grids");
  HalfStepField r(g);
  const double k = g.k();
  for (int m = 0; m < g.steps(); ++m) {
    const auto u0 = u.slice(m), u1 = u.slice(m + 1);
    for (std::size_t i = 0; i < g.spatial_size(); ++i) {
      if (g.on_boundary(i)) continue;
      const Complex l0 = apply_interior(g, u0, i, co.b(m, i), co.c(m, i));
      const Complex l1 = apply_interior(g, u1, i, co.b(m + 1, i), co.c(m + 1, i));
      Complex v = (u1[i] - u0[i]) / k - 0.5 * (l0 + l1);
      if (source) v -= source->at(m, i);
      r.at(m, i) = v;
    }
  }
  return r;
}

ComplexField cn_solve(const StepperCoefficients& co, const ComplexField& dirichlet, const HalfStepField* source,
                      StepperStats* stats) {
  const auto& g = co.grid;
  if (dirichlet.grid() != g) throw std::invalid_argument("cn_solve: boundary data and coefficients live on different grids");
  const InteriorMap map = interior_map(g);
  const std::size_t n = map.nodes.size();
  const double k = g.k();
  const double h = g.h();
  const double ih2 = 1.0 / (h * h);

  ComplexField u(g);
  for (std::size_t i = 0; i < g.spatial_size(); ++i) u.at(0, i) = dirichlet.at(0, i);

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  Eigen::SparseMatrix<double> A;
  int factored_level = -1;
  Eigen::MatrixXd rhs(n, 2), sol(n, 2);
  StepperStats local;

  for (int m = 0; m < g.steps(); ++m) {
    const int next = m + 1;
    if (factored_level < 0 || !co.time_independent) {
      A = assemble(co, map, next);
      lu.compute(A);
      if (lu.info() != Eigen::Success) throw std::runtime_error("Crank-Nicolson factorization failed at step " + std::to_string(m));
      factored_level = next;
      ++local.factorizations;
    }
    auto un = u.slice(next);
    for (std::size_t i = 0; i < g.spatial_size(); ++i)
      if (g.on_boundary(i)) un[i] = dirichlet.at(next, i);
    const auto uo = u.slice(m);
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t i = map.nodes[r];
      Complex v = uo[i] + 0.5 * k * apply_interior(g, uo, i, co.b(m, i), co.c(m, i));
      if (source) v += k * source->at(m, i);
      const Vec& b = co.b(next, i);
      for (int d = 0; d < g.dim(); ++d) {
        const std::size_t s = g.stride(d);
        if (map.index[i + s] < 0) v += 0.5 * k * (ih2 + 0.5 * b[d] / h) * un[i + s];
        if (map.index[i - s] < 0) v += 0.5 * k * (ih2 - 0.5 * b[d] / h) * un[i - s];
      }
      rhs(r, 0) = v.real();
      rhs(r, 1) = v.imag();
    }
    sol = lu.solve(rhs);
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    local.max_linear_residual = std::max(local.max_linear_residual, (A * sol - rhs).cwiseAbs().maxCoeff() / scale);
    for (std::size_t r = 0; r < n; ++r) un[map.nodes[r]] = Complex(sol(r, 0), sol(r, 1));
  }
  if (stats) *stats = local;
  return u;
}

}  // namespace cdlab
