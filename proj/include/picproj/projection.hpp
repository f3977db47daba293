#pragma once

#include "picproj/common.hpp"
#include "picproj/fespace.hpp"
#include "picproj/particles.hpp"
#include "picproj/smallsolve.hpp"

#include <vector>

namespace picproj {

/// Cellwise least-squares fit of a scalar particle slot: M_p c = chi_p psi_p.
/// Throws UnderdeterminedCell when a cell's Gram matrix is singular.
DgField l2_project(const ParticleSet& set, int slot, const DgSpace& space, int threads = 1);

/// Cellwise least-squares fit with lower <= c_j <= upper on every coefficient.
DgField l2_project_bounded(const ParticleSet& set, int slot, const DgSpace& space, double lower, double upper,
                           int threads = 1);

/// Global least-squares fit onto a continuous space, solved by conjugate
/// gradients to relative residual `tol` within 10 * dofs iterations.
CgField l2_project_cg(const ParticleSet& set, int slot, const CgSpace& space, double tol = 1e-10);

enum class TraceSolver { kLdlt, kCg };

/// Trace-dof system after eliminating (psi, lambda) cell by cell, with the
/// per-cell data needed for back substitution.
struct CondensedSystem {
  SparseSym matrix;
  VectorX rhs;
  // Per cell, A^{-1} C and A^{-1} f with A the (psi, lambda) saddle block,
  // C = [L; H] and f = [rhs_psi; rhs_lambda].
  std::vector<MatrixX> a_inv_c;
  std::vector<VectorX> a_inv_f;
  std::vector<LocalBlocks> blocks;
};

struct PdeSolution {
  DgField psi;
  MultiplierField lambda;
  TraceField psibar;
};

/// Conservative particle-to-mesh projection constrained by the discrete
/// advection equation d psi/dt + div(a psi) = 0 over one time step.
class PdeProjection {
 public:
  PdeProjection(const DgSpace& field, const MultiplierSpace& multiplier, const TraceSpace& trace);

  const PdeElement& element() const { return element_; }

  /// Builds the condensed system; `previous` is psi* (the prior mesh field)
  /// and the velocity is evaluated at time t. Cells without particles throw
  /// UnderdeterminedCell, as do cells whose saddle block is singular.
  CondensedSystem assemble(const ParticleSet& set, int slot, const VelocityField& velocity, double t,
                           const PdeParameters& params, const DgField& previous, int threads = 1) const;

  /// Trace solve followed by cellwise back substitution.
  PdeSolution solve(const CondensedSystem& system, TraceSolver solver = TraceSolver::kLdlt, int threads = 1) const;

  /// Per-cell residual of the state equation tested with the constant 1:
  /// (int_K psi - int_K psi*) / dt + int_dK a.n psibar (closed facets carry
  /// no flux).
  VectorX local_balance(const CondensedSystem& system, const PdeSolution& solution, const DgField& previous,
                        const PdeParameters& params) const;

 private:
  PdeElement element_;
};

/// |int (field_t - field_0)|.
double mass_error(const DgField& field_t, const DgField& field_0);

}  // namespace picproj
