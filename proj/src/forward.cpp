#include "cdlab/forward.hpp"

#include <cmath>
#include <iomanip>

namespace cdlab {

namespace {

constexpr double kCompatibility = 1e-14;

BoxFace face_by_id(int id) { return {id, id / 2, id % 2}; }

}  // namespace

ComplexField dirichlet_from_trace(const BoundaryTrace& f) {
  const auto& g = f.grid();
  if (!(f.faces() == FaceSet::all(g.dim()))) throw SolverError("Dirichlet data must cover the whole lateral boundary");
  ComplexField d(g);
  for (int m = 0; m <= g.steps(); ++m)
    for (std::size_t s = 0; s < f.samples().size(); ++s) d.at(m, f.samples()[s].node) = f.at(m, s);
  return d;
}

ComplexField solve_ibvp_complex(const CoefficientPair& c, const ComplexField& dirichlet, const HalfStepField* source,
                                TimeDirection dir, StepperStats* stats) {
  const auto& g = c.grid();
  if (dirichlet.grid() != g) throw SolverError("boundary data and coefficients live on different grids");
  const int start = dir == TimeDirection::Forward ? 0 : g.steps();
  for (std::size_t i = 0; i < g.spatial_size(); ++i)
    if (std::abs(dirichlet.at(start, i)) > kCompatibility)
      throw SolverError(dir == TimeDirection::Forward ? "incompatible boundary data: f(0,.) must vanish"
                                                      : "incompatible boundary data: f(T,.) must vanish");
  const StepperCoefficients co = operator_coefficients(c, dir);
  if (dir == TimeDirection::Forward) return cn_solve(co, dirichlet, source, stats);
  const ComplexField rd = reverse_time(dirichlet);
  if (source) {
    const HalfStepField rs = reverse_time(*source);
    return reverse_time(cn_solve(co, rd, &rs, stats));
  }
  return reverse_time(cn_solve(co, rd, nullptr, stats));
}

ScalarField solve_ibvp(const CoefficientPair& c, const BoundaryTrace& f, const ScalarField* source, TimeDirection dir,
                       StepperStats* stats) {
  if (f.grid() != c.grid()) throw SolverError("boundary data and coefficients live on different grids");
  const ComplexField d = dirichlet_from_trace(f);
  ComplexField u = [&] {
    if (!source) return solve_ibvp_complex(c, d, nullptr, dir, stats);
    const HalfStepField s = half_step_average(to_complex(*source));
    return solve_ibvp_complex(c, d, &s, dir, stats);
  }();
  ScalarField out(c.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = u.values()[i].real();
  return out;
}

BoundaryTrace dn_output(const CoefficientPair& c, const ScalarField& u) {
  const auto& g = c.grid();
  if (u.grid() != g) throw SolverError("solution and coefficients live on different grids");
  BoundaryTrace tr(g, FaceSet::all(g.dim()), "sigma");
  for (int m = 0; m <= g.steps(); ++m) {
    const auto s = u.slice(m);
    for (std::size_t k = 0; k < tr.samples().size(); ++k) {
      const auto& smp = tr.samples()[k];
      const BoxFace face = face_by_id(smp.face);
      const double nu_a = dot(face.normal(), c.convection().at(m, smp.node));
      tr.at(m, k) = normal_derivative(g, s, smp.node, face) + 2.0 * nu_a * s[smp.node];
    }
  }
  return tr;
}

BoundaryTrace dn_difference_on_G(const CoefficientPair& c1, const CoefficientPair& c2, const BoundaryTrace& f,
                                 const BoundaryRegion& G) {
  if (c1.grid() != c2.grid()) throw SolverError("coefficient pairs live on different grids");
  const ScalarField u1 = solve_ibvp(c1, f);
  const ScalarField u2 = solve_ibvp(c2, f);
  BoundaryTrace d = dn_output(c1, u1) - dn_output(c2, u2);
  return d.restrict_to(G.faces(), "G");
}

void write_trace_csv(std::ostream& os, const BoundaryTrace& tr) {
  const auto& g = tr.grid();
  os << "t,face";
  for (int d = 0; d < g.dim(); ++d) os << ",x" << d + 1;
  os << ",value\n";
  os << std::setprecision(17);
  for (int m = 0; m <= g.steps(); ++m)
    for (std::size_t k = 0; k < tr.samples().size(); ++k) {
      const auto& smp = tr.samples()[k];
      const Vec x = g.coord(smp.node);
      os << g.time(m) << "," << smp.face;
      for (int d = 0; d < g.dim(); ++d) os << "," << x[d];
      os << "," << tr.at(m, k) << "\n";
    }
}

}  // namespace cdlab
