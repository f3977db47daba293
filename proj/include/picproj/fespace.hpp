#pragma once

#include "picproj/basis.hpp"
#include "picproj/common.hpp"
#include "picproj/mesh.hpp"
#include "picproj/quadrature.hpp"

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace picproj {

/// Discontinuous P_k space on the cells of a mesh. The dofs of cell c are the
/// contiguous block [c * dofs_per_cell, (c + 1) * dofs_per_cell).
class DgSpace {
 public:
  DgSpace(const SimplicialMesh& mesh, int order);

  const SimplicialMesh& mesh() const { return *mesh_; }
  int order() const { return order_; }
  int dofs_per_cell() const { return basis_.size(); }
  Index num_dofs() const { return mesh_->num_cells() * dofs_per_cell(); }
  Index first_dof(Index cell) const { return cell * dofs_per_cell(); }
  const LagrangeBasis<double>& basis() const { return basis_; }

  /// Basis values at a physical point, no containment check.
  VectorX values_at(Index cell, const Vec2& x) const;
  /// Physical gradients (one row per basis function) at a reference point.
  Eigen::MatrixX2d gradients_at(Index cell, const Vec2& xi) const;
  /// Reference integrals of each basis function (area 1/2 reference).
  const VectorX& reference_integrals() const { return reference_integrals_; }

 private:
  const SimplicialMesh* mesh_;
  int order_;
  LagrangeBasis<double> basis_;
  VectorX reference_integrals_;
};

/// Cellwise P_l space for the Lagrange multiplier of the conservation constraint.
class MultiplierSpace : public DgSpace {
 public:
  using DgSpace::DgSpace;
};

/// Discontinuous P_k space on facets. Facet nodes are parametrised from the
/// facet's lower vertex to its higher vertex. Paired periodic facets share
/// their dofs.
class TraceSpace {
 public:
  TraceSpace(const SimplicialMesh& mesh, int order);

  const SimplicialMesh& mesh() const { return *mesh_; }
  int order() const { return order_; }
  int dofs_per_facet() const { return basis_.size(); }
  Index num_dofs() const { return num_dofs_; }
  /// Global dof of node j of facet f.
  Index dof(Index f, int j) const { return dofs_[static_cast<std::size_t>(f * dofs_per_facet() + j)]; }
  const LineBasis<double>& basis() const { return basis_; }

 private:
  const SimplicialMesh* mesh_;
  int order_;
  LineBasis<double> basis_;
  std::vector<Index> dofs_;
  Index num_dofs_ = 0;
};

/// Continuous nodal P_k space (k >= 1), no periodic identification.
class CgSpace {
 public:
  CgSpace(const SimplicialMesh& mesh, int order);

  const SimplicialMesh& mesh() const { return *mesh_; }
  int order() const { return order_; }
  int dofs_per_cell() const { return basis_.size(); }
  Index num_dofs() const { return num_dofs_; }
  std::span<const Index> cell_dofs(Index cell) const {
    return {cell_dofs_.data() + cell * dofs_per_cell(), static_cast<std::size_t>(dofs_per_cell())};
  }
  const LagrangeBasis<double>& basis() const { return basis_; }

 private:
  const SimplicialMesh* mesh_;
  int order_;
  LagrangeBasis<double> basis_;
  std::vector<Index> cell_dofs_;
  Index num_dofs_ = 0;
};

template <typename Space>
struct FieldOn {
  const Space* space = nullptr;
  VectorX coefficients;

  FieldOn() = default;
  explicit FieldOn(const Space& s) : space(&s), coefficients(VectorX::Zero(s.num_dofs())) {}
  FieldOn(const Space& s, VectorX c) : space(&s), coefficients(std::move(c)) {
    if (coefficients.size() != s.num_dofs()) throw InvalidArgument("coefficient length does not match the space");
  }
};

struct DgField : FieldOn<DgSpace> {
  using FieldOn::FieldOn;
  auto cell_coefficients(Index cell) const {
    return coefficients.segment(space->first_dof(cell), space->dofs_per_cell());
  }
  auto cell_coefficients(Index cell) {
    return coefficients.segment(space->first_dof(cell), space->dofs_per_cell());
  }
};

struct MultiplierField : FieldOn<MultiplierSpace> {
  using FieldOn::FieldOn;
  auto cell_coefficients(Index cell) const {
    return coefficients.segment(space->first_dof(cell), space->dofs_per_cell());
  }
};

struct TraceField : FieldOn<TraceSpace> {
  using FieldOn::FieldOn;
};

struct CgField : FieldOn<CgSpace> {
  using FieldOn::FieldOn;
  /// Same piecewise polynomial expressed in a DG space of equal order.
  DgField to_dg(const DgSpace& target) const;
};

/// psi_h(x) for x in the closed cell (barycentric tolerance 1e-10).
double eval(const DgField& field, Index cell, const Vec2& x);
double eval(const CgField& field, Index cell, const Vec2& x);

/// Nodal interpolant of f.
DgField interpolate(const DgSpace& space, const std::function<double(const Vec2&)>& f);

/// Integral of the field over the domain.
double integrate(const DgField& field);
double integrate_cell(const DgField& field, Index cell);
/// Integral of |psi_h| over the domain.
double integrate_abs(const DgField& field, int extra_degree = 4);

/// L2 norm of (psi_h - exact), quadrature of degree 2k + extra_degree.
double l2_error(const DgField& field, const std::function<double(const Vec2&)>& exact, int extra_degree = 6);

/// Min and max over an order-max(2k, 1) lattice of points in every cell
/// (includes the vertices and Lagrange nodes).
std::pair<double, double> sample_extrema(const DgField& field);

// ---------------------------------------------------------------------------
// Element matrices of the PDE-constrained projection

struct PdeParameters {
  double dt = 1.0;
  double theta = 1.0;
  double beta = 1e-6;
  double zeta = 0.0;
};

/// Per-cell blocks of the 3x3 system in (psi, lambda, psibar).
///   [ Mp + N   G      L ] [psi   ]   [ rhs_psi    ]
///   [ G^T      0      H ] [lambda] = [ rhs_lambda ]
///   [ L^T      H^T    B ] [psibar]   [ 0          ]
/// Trace columns are ordered by local facet, then facet node.
struct LocalBlocks {
  MatrixX Mp;  // sum_p phi_i(x_p) phi_j(x_p)
  MatrixX N;   // zeta (grad phi_j, grad phi_i)_K + beta <phi_j, phi_i>_dK
  MatrixX G;   // (phi_i, tau_j)_K / dt - theta (a phi_i, grad tau_j)_K
  MatrixX L;   // -beta <xi_m, phi_i>_dK
  MatrixX H;   // <a.n xi_m, tau_j>_dK, zero on closed boundary facets
  MatrixX B;   // beta <xi_m, xi_n>_dK
  VectorX rhs_psi;
  VectorX rhs_lambda;
};

/// Precomputed reference tables for assembling LocalBlocks on one
/// combination of spaces. Immutable; assembly is safe from any thread.
class PdeElement {
 public:
  PdeElement(const DgSpace& field, const MultiplierSpace& multiplier, const TraceSpace& trace);

  const DgSpace& field_space() const { return *field_; }
  const MultiplierSpace& multiplier_space() const { return *multiplier_; }
  const TraceSpace& trace_space() const { return *trace_; }
  int trace_dofs_per_cell() const { return 3 * trace_->dofs_per_facet(); }
  /// Global trace dofs matching the local trace columns of a cell.
  std::vector<Index> cell_trace_dofs(Index cell) const;

  /// N, G, L, H, B for one cell; velocity evaluated at time t.
  void assemble(Index cell, const VelocityField& velocity, double t, const PdeParameters& params,
                LocalBlocks& blocks) const;
  /// (psi*, tau_j)_K / dt + (1 - theta) (a psi*, grad tau_j)_K.
  VectorX state_rhs(Index cell, const VelocityField& velocity, double t, const PdeParameters& params,
                    const DgField& previous) const;

 private:
  struct FacetTable {
    std::vector<double> weights;   // on [0, 1]
    std::vector<Vec2> reference;   // cell reference coordinates of the points
    std::vector<VectorX> phi;      // field basis
    std::vector<VectorX> tau;      // multiplier basis
    std::vector<VectorX> xi;       // trace basis in local edge orientation
    std::vector<double> s_local;   // edge parameter in local orientation
  };

  const DgSpace* field_;
  const MultiplierSpace* multiplier_;
  const TraceSpace* trace_;
  QuadratureRule<double> cell_rule_;
  std::vector<VectorX> cell_phi_;
  std::vector<Eigen::MatrixX2d> cell_dphi_;
  std::vector<VectorX> cell_tau_;
  std::vector<Eigen::MatrixX2d> cell_dtau_;
  std::array<FacetTable, 3> facets_;
};

/// LocalBlocks convenience wrapper for one cell (fills N, G, L, H, B).
LocalBlocks assemble_local_blocks(const PdeElement& element, Index cell, const VelocityField& velocity, double t,
                                  const PdeParameters& params);

/// Particle Gram matrix and right-hand side of one cell:
/// (Mp)_ij = sum_p phi_i(x_p) phi_j(x_p), rhs_i = sum_p phi_i(x_p) psi_p.
std::pair<MatrixX, VectorX> local_particle_blocks(const DgSpace& space, Index cell, std::span<const Vec2> positions,
                                                  std::span<const double> values);

}  // namespace picproj
