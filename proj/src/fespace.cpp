#include "picproj/fespace.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace picproj {

namespace {

const Vec2 kReferenceVertex[3] = {Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};

}  // namespace

DgSpace::DgSpace(const SimplicialMesh& mesh, int order) : mesh_(&mesh), order_(order), basis_(order) {
  const auto rule = cell_quadrature<double>(std::max(order, 1));
  reference_integrals_ = VectorX::Zero(basis_.size());
  for (std::size_t q = 0; q < rule.size(); ++q) reference_integrals_ += rule.weights[q] * basis_.values(rule.points[q]);
}

VectorX DgSpace::values_at(Index cell, const Vec2& x) const { return basis_.values(mesh_->to_reference(cell, x)); }

Eigen::MatrixX2d DgSpace::gradients_at(Index cell, const Vec2& xi) const {
  return basis_.gradients(xi) * mesh_->jacobian(cell).inverse();
}

TraceSpace::TraceSpace(const SimplicialMesh& mesh, int order) : mesh_(&mesh), order_(order), basis_(order) {
  if (order < 0) throw InvalidArgument("trace order must be non-negative");
  const int n = basis_.size();
  dofs_.assign(static_cast<std::size_t>(mesh.num_facets() * n), kNone);
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    const Index g = mesh.periodic_partner(f);
    if (g != kNone && g < f) {
      const Vec2 a = mesh.vertex(mesh.facet(f)[0]) + mesh.periodic_translation(f);
      const bool same = (a - mesh.vertex(mesh.facet(g)[0])).norm() <= (a - mesh.vertex(mesh.facet(g)[1])).norm();
      for (int j = 0; j < n; ++j) dofs_[f * n + j] = dof(g, same ? j : n - 1 - j);
    } else {
      for (int j = 0; j < n; ++j) dofs_[f * n + j] = num_dofs_++;
    }
  }
}

CgSpace::CgSpace(const SimplicialMesh& mesh, int order) : mesh_(&mesh), order_(order), basis_(order) {
  if (order < 1) throw InvalidArgument("continuous space needs order >= 1");
  const int n = basis_.size();
  const Index nv = mesh.num_vertices();
  const Index edge_nodes = order - 1;
  const int interior = (order - 1) * (order - 2) / 2;
  cell_dofs_.resize(static_cast<std::size_t>(mesh.num_cells() * n));
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const auto& cell = mesh.cell(c);
    int interior_counter = 0;
    for (int j = 0; j < n; ++j) {
      const auto& alpha = basis_.node_index(j);
      const int zeros = static_cast<int>(std::count(alpha.begin(), alpha.end(), 0));
      Index dof = kNone;
      if (zeros == 2) {
        const int v = static_cast<int>(std::find(alpha.begin(), alpha.end(), order) - alpha.begin());
        dof = cell[v];
      } else if (zeros == 1) {
        const int opposite = static_cast<int>(std::find(alpha.begin(), alpha.end(), 0) - alpha.begin());
        const Index f = mesh.cell_facets(c)[opposite];
        // position along the facet measured from its higher vertex weight
        const Index hi = mesh.facet(f)[1];
        const int local_hi = static_cast<int>(std::find(cell.begin(), cell.end(), hi) - cell.begin());
        dof = nv + f * edge_nodes + (alpha[local_hi] - 1);
      } else {
        dof = nv + mesh.num_facets() * edge_nodes + c * interior + interior_counter++;
      }
      cell_dofs_[c * n + j] = dof;
    }
  }
  num_dofs_ = nv + mesh.num_facets() * edge_nodes + mesh.num_cells() * interior;
}

DgField CgField::to_dg(const DgSpace& target) const {
  if (target.order() != space->order() || &target.mesh() != &space->mesh()) {
    throw InvalidArgument("target DG space must share mesh and order");
  }
  DgField out(target);
  for (Index c = 0; c < target.mesh().num_cells(); ++c) {
    const auto dofs = space->cell_dofs(c);
    for (std::size_t j = 0; j < dofs.size(); ++j) out.coefficients(target.first_dof(c) + static_cast<Index>(j)) = coefficients(dofs[j]);
  }
  return out;
}

double eval(const DgField& field, Index cell, const Vec2& x) {
  const auto& mesh = field.space->mesh();
  if (!mesh.contains(cell, x, 1e-10)) throw InvalidArgument("evaluation point lies outside the cell");
  return field.cell_coefficients(cell).dot(field.space->values_at(cell, x));
}

double eval(const CgField& field, Index cell, const Vec2& x) {
  const auto& mesh = field.space->mesh();
  if (!mesh.contains(cell, x, 1e-10)) throw InvalidArgument("evaluation point lies outside the cell");
  const VectorX phi = field.space->basis().values(mesh.to_reference(cell, x));
  const auto dofs = field.space->cell_dofs(cell);
  double value = 0.0;
  for (std::size_t j = 0; j < dofs.size(); ++j) value += phi(static_cast<Index>(j)) * field.coefficients(dofs[j]);
  return value;
}

DgField interpolate(const DgSpace& space, const std::function<double(const Vec2&)>& f) {
  DgField out(space);
  const auto& mesh = space.mesh();
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const Vec2 v0 = mesh.vertex(mesh.cell(c)[0]);
    const Mat2 jac = mesh.jacobian(c);
    for (int j = 0; j < space.dofs_per_cell(); ++j) {
      out.coefficients(space.first_dof(c) + j) = f(v0 + jac * space.basis().nodes()[j]);
    }
  }
  return out;
}

double integrate_cell(const DgField& field, Index cell) {
  return 2.0 * field.space->mesh().cell_area(cell) * field.space->reference_integrals().dot(field.cell_coefficients(cell));
}

double integrate(const DgField& field) {
  double total = 0.0;
  for (Index c = 0; c < field.space->mesh().num_cells(); ++c) total += integrate_cell(field, c);
  return total;
}

double integrate_abs(const DgField& field, int extra_degree) {
  const auto& space = *field.space;
  const auto& mesh = space.mesh();
  const auto rule = cell_quadrature<double>(std::min(space.order() + extra_degree, 10));
  std::vector<VectorX> phi;
  for (const auto& p : rule.points) phi.push_back(space.basis().values(p));
  double total = 0.0;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const auto coeffs = field.cell_coefficients(c);
    double cell_sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) cell_sum += rule.weights[q] * std::abs(coeffs.dot(phi[q]));
    total += 2.0 * mesh.cell_area(c) * cell_sum;
  }
  return total;
}

double l2_error(const DgField& field, const std::function<double(const Vec2&)>& exact, int extra_degree) {
  const auto& space = *field.space;
  const auto& mesh = space.mesh();
  const auto rule = cell_quadrature<double>(std::min(2 * space.order() + extra_degree, 10));
  std::vector<VectorX> phi;
  for (const auto& p : rule.points) phi.push_back(space.basis().values(p));
  double total = 0.0;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const Vec2 v0 = mesh.vertex(mesh.cell(c)[0]);
    const Mat2 jac = mesh.jacobian(c);
    const auto coeffs = field.cell_coefficients(c);
    double cell_sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double diff = coeffs.dot(phi[q]) - exact(v0 + jac * rule.points[q]);
      cell_sum += rule.weights[q] * diff * diff;
    }
    total += 2.0 * mesh.cell_area(c) * cell_sum;
  }
  return std::sqrt(total);
}

std::pair<double, double> sample_extrema(const DgField& field) {
  const auto& space = *field.space;
  const int m = std::max(2 * space.order(), 1);
  std::vector<VectorX> phi;
  for (int b = 0; b <= m; ++b)
    for (int a = 0; a + b <= m; ++a) phi.push_back(space.basis().values(Vec2(double(a) / m, double(b) / m)));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Index c = 0; c < space.mesh().num_cells(); ++c) {
    const auto coeffs = field.cell_coefficients(c);
    for (const auto& p : phi) {
      const double v = coeffs.dot(p);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return {lo, hi};
}

PdeElement::PdeElement(const DgSpace& field, const MultiplierSpace& multiplier, const TraceSpace& trace)
    : field_(&field), multiplier_(&multiplier), trace_(&trace) {
  if (&field.mesh() != &multiplier.mesh() || &field.mesh() != &trace.mesh()) {
    throw InvalidArgument("PDE spaces must share one mesh");
  }
  const int k = field.order();
  cell_rule_ = cell_quadrature<double>(std::min(std::max(2 * k + 1, k + multiplier.order()), 10));
  for (const auto& p : cell_rule_.points) {
    cell_phi_.push_back(field.basis().values(p));
    cell_dphi_.push_back(field.basis().gradients(p));
    cell_tau_.push_back(multiplier.basis().values(p));
    cell_dtau_.push_back(multiplier.basis().gradients(p));
  }
  const auto line = facet_quadrature<double>(2 * k + 1);
  for (int i = 0; i < 3; ++i) {
    auto& table = facets_[i];
    const Vec2& a = kReferenceVertex[(i + 1) % 3];
    const Vec2& b = kReferenceVertex[(i + 2) % 3];
    for (std::size_t q = 0; q < line.size(); ++q) {
      const double s = line.points[q];
      const Vec2 ref = (1.0 - s) * a + s * b;
      table.weights.push_back(line.weights[q]);
      table.reference.push_back(ref);
      table.s_local.push_back(s);
      table.phi.push_back(field.basis().values(ref));
      table.tau.push_back(multiplier.basis().values(ref));
      table.xi.push_back(trace.basis().values(s));
    }
  }
}

std::vector<Index> PdeElement::cell_trace_dofs(Index cell) const {
  const int n = trace_->dofs_per_facet();
  std::vector<Index> dofs;
  dofs.reserve(3 * n);
  for (int i = 0; i < 3; ++i) {
    const Index f = trace_->mesh().cell_facets(cell)[i];
    for (int j = 0; j < n; ++j) dofs.push_back(trace_->dof(f, j));
  }
  return dofs;
}

void PdeElement::assemble(Index cell, const VelocityField& velocity, double t, const PdeParameters& params,
                          LocalBlocks& blocks) const {
  const auto& mesh = field_->mesh();
  const int nk = field_->dofs_per_cell();
  const int nl = multiplier_->dofs_per_cell();
  const int nf = trace_->dofs_per_facet();
  const int nt = 3 * nf;
  const Mat2 jac = mesh.jacobian(cell);
  const Mat2 jac_inv = jac.inverse();
  const double det = 2.0 * mesh.cell_area(cell);
  const Vec2 v0 = mesh.vertex(mesh.cell(cell)[0]);

  blocks.N = MatrixX::Zero(nk, nk);
  blocks.G = MatrixX::Zero(nk, nl);
  blocks.L = MatrixX::Zero(nk, nt);
  blocks.H = MatrixX::Zero(nl, nt);
  blocks.B = MatrixX::Zero(nt, nt);

  const bool need_advective = params.theta != 0.0 && multiplier_->order() > 0;
  for (std::size_t q = 0; q < cell_rule_.size(); ++q) {
    const double w = cell_rule_.weights[q] * det;
    if (params.zeta != 0.0) {
      const Eigen::MatrixX2d dphi = cell_dphi_[q] * jac_inv;
      blocks.N.noalias() += (params.zeta * w) * dphi * dphi.transpose();
    }
    blocks.G.noalias() += (w / params.dt) * cell_phi_[q] * cell_tau_[q].transpose();
    if (need_advective) {
      const Vec2 a = velocity(v0 + jac * cell_rule_.points[q], t);
      const VectorX a_dot_dtau = cell_dtau_[q] * (jac_inv * a);
      blocks.G.noalias() -= (params.theta * w) * cell_phi_[q] * a_dot_dtau.transpose();
    }
  }

  for (int i = 0; i < 3; ++i) {
    const Index f = mesh.cell_facets(cell)[i];
    const double length = mesh.facet_length(f);
    const Vec2 normal = mesh.outward_normal(cell, i);
    const bool flipped = mesh.cell(cell)[(i + 1) % 3] != mesh.facet(f)[0];
    const bool carries_flux = !(mesh.is_boundary(f) && mesh.boundary_marker(f) == marker::kClosed);
    const auto& table = facets_[i];
    for (std::size_t q = 0; q < table.weights.size(); ++q) {
      const double w = table.weights[q] * length;
      const VectorX& phi = table.phi[q];
      const VectorX xi = flipped ? trace_->basis().values(1.0 - table.s_local[q]) : table.xi[q];
      blocks.N.noalias() += (params.beta * w) * phi * phi.transpose();
      blocks.L.middleCols(i * nf, nf).noalias() -= (params.beta * w) * phi * xi.transpose();
      blocks.B.block(i * nf, i * nf, nf, nf).noalias() += (params.beta * w) * xi * xi.transpose();
      if (carries_flux) {
        const double an = velocity(v0 + jac * table.reference[q], t).dot(normal);
        blocks.H.middleCols(i * nf, nf).noalias() += (an * w) * table.tau[q] * xi.transpose();
      }
    }
  }
}

VectorX PdeElement::state_rhs(Index cell, const VelocityField& velocity, double t, const PdeParameters& params,
                              const DgField& previous) const {
  const auto& mesh = field_->mesh();
  const Mat2 jac = mesh.jacobian(cell);
  const Mat2 jac_inv = jac.inverse();
  const double det = 2.0 * mesh.cell_area(cell);
  const Vec2 v0 = mesh.vertex(mesh.cell(cell)[0]);
  const auto coeffs = previous.cell_coefficients(cell);
  const bool need_advective = params.theta != 1.0 && multiplier_->order() > 0;
  VectorX rhs = VectorX::Zero(multiplier_->dofs_per_cell());
  for (std::size_t q = 0; q < cell_rule_.size(); ++q) {
    const double w = cell_rule_.weights[q] * det;
    const double psi = coeffs.dot(cell_phi_[q]);
    rhs.noalias() += (w * psi / params.dt) * cell_tau_[q];
    if (need_advective) {
      const Vec2 a = velocity(v0 + jac * cell_rule_.points[q], t);
      rhs.noalias() += ((1.0 - params.theta) * w * psi) * (cell_dtau_[q] * (jac_inv * a));
    }
  }
  return rhs;
}

LocalBlocks assemble_local_blocks(const PdeElement& element, Index cell, const VelocityField& velocity, double t,
                                  const PdeParameters& params) {
  LocalBlocks blocks;
  element.assemble(cell, velocity, t, params, blocks);
  return blocks;
}

std::pair<MatrixX, VectorX> local_particle_blocks(const DgSpace& space, Index cell, std::span<const Vec2> positions,
                                                  std::span<const double> values) {
  if (positions.size() != values.size()) throw InvalidArgument("positions and values differ in length");
  const int n = space.dofs_per_cell();
  MatrixX gram = MatrixX::Zero(n, n);
  VectorX rhs = VectorX::Zero(n);
  for (std::size_t p = 0; p < positions.size(); ++p) {
    const VectorX phi = space.values_at(cell, positions[p]);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(phi);
    rhs.noalias() += values[p] * phi;
  }
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  return {gram, rhs};
}

}  // namespace picproj
