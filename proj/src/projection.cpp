#include "picproj/projection.hpp"

#include "picproj/parallel.hpp"

#include <Eigen/SparseCore>

namespace picproj {

namespace {

struct CellSample {
  std::vector<Vec2> x;
  std::vector<double> v;
};

CellSample gather(const ParticleSet& set, int slot, Index cell) {
  CellSample s;
  const auto particles = set.particles(cell);
  s.x.reserve(particles.size());
  s.v.reserve(particles.size());
  for (const auto& p : particles) {
    s.x.push_back(p.x);
    s.v.push_back(set.value(p, slot));
  }
  return s;
}

void check_slot(const ParticleSet& set, int slot, const SimplicialMesh& mesh) {
  if (slot < 1 || slot >= set.num_slots() || set.components(slot) != 1) {
    throw InvalidArgument("projection needs a scalar property slot");
  }
  if (&set.mesh() != &mesh) throw InvalidArgument("particles and space live on different meshes");
}

template <typename Solve>
DgField cellwise_fit(const ParticleSet& set, int slot, const DgSpace& space, int threads, Solve&& solve) {
  check_slot(set, slot, space.mesh());
  DgField out(space);
  parallel_for(space.mesh().num_cells(), threads, [&](Index begin, Index end, int) {
    for (Index c = begin; c < end; ++c) {
      const CellSample s = gather(set, slot, c);
      const auto [gram, rhs] = local_particle_blocks(space, c, s.x, s.v);
      try {
        out.cell_coefficients(c) = solve(gram, rhs);
      } catch (const SingularMatrix&) {
        throw UnderdeterminedCell(c, static_cast<Index>(s.x.size()));
      }
    }
  });
  return out;
}

void check_parameters(const PdeParameters& p) {
  if (!(p.beta > 0.0)) throw InvalidArgument("beta must be positive");
  if (!(p.dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (!(p.theta >= 0.0 && p.theta <= 1.0)) throw InvalidArgument("theta must lie in [0, 1]");
  if (!(p.zeta >= 0.0)) throw InvalidArgument("zeta must be non-negative");
}

}  // namespace

DgField l2_project(const ParticleSet& set, int slot, const DgSpace& space, int threads) {
  return cellwise_fit(set, slot, space, threads,
                      [](const MatrixX& m, const VectorX& q) { return lu_solve<double>(m, VectorX(q)); });
}

DgField l2_project_bounded(const ParticleSet& set, int slot, const DgSpace& space, double lower, double upper,
                           int threads) {
  if (!(lower < upper)) throw InvalidArgument("lower bound must be below upper bound");
  return cellwise_fit(set, slot, space, threads,
                      [&](const MatrixX& m, const VectorX& q) { return box_qp<double>(m, q, lower, upper); });
}

CgField l2_project_cg(const ParticleSet& set, int slot, const CgSpace& space, double tol) {
  check_slot(set, slot, space.mesh());
  const auto& mesh = space.mesh();
  std::vector<Eigen::Triplet<double>> triplets;
  VectorX rhs = VectorX::Zero(space.num_dofs());
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const auto dofs = space.cell_dofs(c);
    for (const auto& p : set.particles(c)) {
      const VectorX phi = space.basis().values(mesh.to_reference(c, p.x));
      const double v = set.value(p, slot);
      for (std::size_t i = 0; i < dofs.size(); ++i) {
        rhs(dofs[i]) += phi(static_cast<Index>(i)) * v;
        for (std::size_t j = 0; j < dofs.size(); ++j) {
          triplets.emplace_back(dofs[i], dofs[j], phi(static_cast<Index>(i)) * phi(static_cast<Index>(j)));
        }
      }
    }
  }
  SparseSym gram(space.num_dofs(), space.num_dofs());
  gram.setFromTriplets(triplets.begin(), triplets.end());
  const auto result = cg_solve(gram, rhs, tol, static_cast<int>(10 * space.num_dofs()));
  return CgField(space, result.x);
}

PdeProjection::PdeProjection(const DgSpace& field, const MultiplierSpace& multiplier, const TraceSpace& trace)
    : element_(field, multiplier, trace) {
  if (trace.order() != field.order()) throw InvalidArgument("trace and field spaces must have equal order");
}

CondensedSystem PdeProjection::assemble(const ParticleSet& set, int slot, const VelocityField& velocity, double t,
                                        const PdeParameters& params, const DgField& previous, int threads) const {
  const DgSpace& field = element_.field_space();
  check_slot(set, slot, field.mesh());
  check_parameters(params);
  if (previous.space != &field) throw InvalidArgument("previous field must live in the projection space");
  const Index cells = field.mesh().num_cells();
  const int nk = field.dofs_per_cell();
  const int nl = element_.multiplier_space().dofs_per_cell();
  const int nt = element_.trace_dofs_per_cell();
  const int na = nk + nl;

  CondensedSystem sys;
  sys.a_inv_c.resize(static_cast<std::size_t>(cells));
  sys.a_inv_f.resize(static_cast<std::size_t>(cells));
  sys.blocks.resize(static_cast<std::size_t>(cells));
  std::vector<MatrixX> schur(static_cast<std::size_t>(cells));
  std::vector<VectorX> schur_rhs(static_cast<std::size_t>(cells));

  parallel_for(cells, threads, [&](Index begin, Index end, int) {
    for (Index c = begin; c < end; ++c) {
      const CellSample s = gather(set, slot, c);
      if (s.x.empty()) throw UnderdeterminedCell(c, 0);
      LocalBlocks& b = sys.blocks[c];
      element_.assemble(c, velocity, t, params, b);
      std::tie(b.Mp, b.rhs_psi) = local_particle_blocks(field, c, s.x, s.v);
      b.rhs_lambda = element_.state_rhs(c, velocity, t, params, previous);

      MatrixX a = MatrixX::Zero(na, na);
      a.topLeftCorner(nk, nk) = b.Mp + b.N;
      a.topRightCorner(nk, nl) = b.G;
      a.bottomLeftCorner(nl, nk) = b.G.transpose();
      MatrixX rhs(na, nt + 1);
      rhs.topLeftCorner(nk, nt) = b.L;
      rhs.bottomLeftCorner(nl, nt) = b.H;
      rhs.col(nt) << b.rhs_psi, b.rhs_lambda;
      MatrixX x;
      try {
        x = lu_solve<double>(a, rhs);
      } catch (const SingularMatrix&) {
        throw UnderdeterminedCell(c, static_cast<Index>(s.x.size()));
      }
      sys.a_inv_c[c] = x.leftCols(nt);
      sys.a_inv_f[c] = x.col(nt);
      const MatrixX& cmat = rhs.leftCols(nt);
      MatrixX k = b.B - cmat.transpose() * sys.a_inv_c[c];
      schur[c] = 0.5 * (k + k.transpose());
      schur_rhs[c] = -cmat.transpose() * sys.a_inv_f[c];
    }
  });

  const Index n = element_.trace_space().num_dofs();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(cells * nt * nt));
  sys.rhs = VectorX::Zero(n);
  for (Index c = 0; c < cells; ++c) {
    const auto dofs = element_.cell_trace_dofs(c);
    for (int i = 0; i < nt; ++i) {
      sys.rhs(dofs[i]) += schur_rhs[c](i);
      for (int j = 0; j < nt; ++j) triplets.emplace_back(dofs[i], dofs[j], schur[c](i, j));
    }
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

PdeSolution PdeProjection::solve(const CondensedSystem& system, TraceSolver solver, int threads) const {
  const DgSpace& field = element_.field_space();
  const auto& multiplier = element_.multiplier_space();
  PdeSolution out{DgField(field), MultiplierField(multiplier), TraceField(element_.trace_space())};
  out.psibar.coefficients = solver == TraceSolver::kLdlt ? ldl_solve(system.matrix, system.rhs)
                                                         : cg_solve(system.matrix, system.rhs, 1e-12).x;
  const int nk = field.dofs_per_cell();
  const int nl = multiplier.dofs_per_cell();
  parallel_for(field.mesh().num_cells(), threads, [&](Index begin, Index end, int) {
    for (Index c = begin; c < end; ++c) {
      const auto dofs = element_.cell_trace_dofs(c);
      VectorX local(static_cast<Index>(dofs.size()));
      for (std::size_t i = 0; i < dofs.size(); ++i) local(static_cast<Index>(i)) = out.psibar.coefficients(dofs[i]);
      const VectorX x = system.a_inv_f[c] - system.a_inv_c[c] * local;
      out.psi.cell_coefficients(c) = x.head(nk);
      out.lambda.coefficients.segment(multiplier.first_dof(c), nl) = x.tail(nl);
    }
  });
  return out;
}

VectorX PdeProjection::local_balance(const CondensedSystem& system, const PdeSolution& solution,
                                     const DgField& previous, const PdeParameters& params) const {
  const Index cells = element_.field_space().mesh().num_cells();
  VectorX balance(cells);
  for (Index c = 0; c < cells; ++c) {
    const auto& b = system.blocks[c];
    const auto dofs = element_.cell_trace_dofs(c);
    VectorX local(static_cast<Index>(dofs.size()));
    for (std::size_t i = 0; i < dofs.size(); ++i) local(static_cast<Index>(i)) = solution.psibar.coefficients(dofs[i]);
    // the multiplier basis sums to one, so summing the state-equation rows
    // tests with the constant function; the theta-weighted gradient terms vanish
    const double flux = (b.H * local).sum();
    balance(c) = (integrate_cell(solution.psi, c) - integrate_cell(previous, c)) / params.dt + flux;
  }
  return balance;
}

double mass_error(const DgField& field_t, const DgField& field_0) {
  if (field_t.space != field_0.space) throw InvalidArgument("mass_error needs fields on one space");
  return std::abs(integrate(field_t) - integrate(field_0));
}

}  // namespace picproj
