#pragma once

// Reference implementations used as test oracles. They share no code with
// the library beyond the mesh container.

#include "picproj/mesh.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <vector>

namespace oracle {

using picproj::Index;
using picproj::Vec2;

/// Silvester's product form of the equispaced Lagrange basis: the function
/// attached to barycentric index alpha is prod_m prod_{s < alpha_m} (k L_m - s) / (s + 1).
template <typename T = double>
T silvester(int k, const std::array<int, 3>& alpha, const std::array<T, 3>& lambda) {
  T value = 1;
  for (int m = 0; m < 3; ++m) {
    for (int s = 0; s < alpha[m]; ++s) value *= (T(k) * lambda[m] - T(s)) / T(s + 1);
  }
  return value;
}

/// Derivative of the Silvester function with respect to lambda_m.
inline double silvester_dlambda(int k, const std::array<int, 3>& alpha, const std::array<double, 3>& lambda, int m) {
  double total = 0;
  for (int t = 0; t < alpha[m]; ++t) {
    double term = double(k) / double(t + 1);
    for (int s = 0; s < alpha[m]; ++s) {
      if (s != t) term *= (k * lambda[m] - s) / double(s + 1);
    }
    for (int o = 0; o < 3; ++o) {
      if (o == m) continue;
      for (int s = 0; s < alpha[o]; ++s) term *= (k * lambda[o] - s) / double(s + 1);
    }
    total += term;
  }
  return total;
}

/// Barycentric indices in the same node order as the library: by b, then a,
/// index (k - a - b, a, b). Order 0 is the single constant function.
inline std::vector<std::array<int, 3>> node_indices(int k) {
  std::vector<std::array<int, 3>> out;
  for (int b = 0; b <= k; ++b)
    for (int a = 0; a + b <= k; ++a) out.push_back({k - a - b, a, b});
  return out;
}

/// Barycentric coordinates of x in the triangle (p0, p1, p2) via Cramer's rule.
inline std::array<double, 3> barycentric(const Vec2& p0, const Vec2& p1, const Vec2& p2, const Vec2& x) {
  const double det = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
  const double l1 = ((x - p0).x() * (p2 - p0).y() - (x - p0).y() * (p2 - p0).x()) / det;
  const double l2 = ((p1 - p0).x() * (x - p0).y() - (p1 - p0).y() * (x - p0).x()) / det;
  return {1.0 - l1 - l2, l1, l2};
}

/// Values and physical gradients of the order-k basis on a triangle.
struct CellBasis {
  int k;
  std::array<Vec2, 3> p;
  std::vector<std::array<int, 3>> alpha;

  CellBasis(int order, const Vec2& p0, const Vec2& p1, const Vec2& p2) : k(order), p{p0, p1, p2}, alpha(node_indices(order)) {}

  int size() const { return static_cast<int>(alpha.size()); }

  Eigen::VectorXd values(const Vec2& x) const {
    const auto lam = barycentric(p[0], p[1], p[2], x);
    Eigen::VectorXd v(size());
    for (int j = 0; j < size(); ++j) v(j) = k == 0 ? 1.0 : silvester(k, alpha[j], lam);
    return v;
  }

  Eigen::MatrixX2d gradients(const Vec2& x) const {
    const auto lam = barycentric(p[0], p[1], p[2], x);
    // gradients of the barycentric coordinates
    const double det = (p[1] - p[0]).x() * (p[2] - p[0]).y() - (p[1] - p[0]).y() * (p[2] - p[0]).x();
    std::array<Vec2, 3> dl;
    for (int m = 0; m < 3; ++m) {
      const Vec2& a = p[(m + 1) % 3];
      const Vec2& b = p[(m + 2) % 3];
      dl[m] = Vec2(a.y() - b.y(), b.x() - a.x()) / det;
    }
    Eigen::MatrixX2d g = Eigen::MatrixX2d::Zero(size(), 2);
    if (k == 0) return g;
    for (int j = 0; j < size(); ++j) {
      for (int m = 0; m < 3; ++m) g.row(j) += silvester_dlambda(k, alpha[j], lam, m) * dl[m].transpose();
    }
    return g;
  }
};

/// Gauss-Legendre rule on [0, 1] via the Golub-Welsch eigenvalue problem.
inline std::pair<std::vector<double>, std::vector<double>> gauss_rule(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jacobi(i, i - 1) = jacobi(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    x[i] = 0.5 * (eig.eigenvalues()(i) + 1.0);
    w[i] = eig.eigenvectors()(0, i) * eig.eigenvectors()(0, i);
  }
  return {x, w};
}

/// Integral over the physical triangle by a collapsed n x n Gauss rule.
inline double integrate_triangle(const Vec2& p0, const Vec2& p1, const Vec2& p2, const std::function<double(const Vec2&)>& f,
                                 int n = 12) {
  const auto [x, w] = gauss_rule(n);
  const double area2 = std::abs((p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x());
  double total = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = x[i];
      const double v = x[j] * (1 - u);
      total += w[i] * w[j] * (1 - u) * f(p0 + u * (p1 - p0) + v * (p2 - p0));
    }
  }
  return total * area2;
}

/// 1D Lagrange basis with equispaced nodes on [0, 1] (midpoint for order 0).
inline Eigen::VectorXd line_basis(int k, double s) {
  Eigen::VectorXd v(k + 1);
  if (k == 0) {
    v(0) = 1.0;
    return v;
  }
  for (int j = 0; j <= k; ++j) {
    double prod = 1;
    for (int m = 0; m <= k; ++m) {
      if (m != j) prod *= (s - double(m) / k) / (double(j) / k - double(m) / k);
    }
    v(j) = prod;
  }
  return v;
}

struct CellParticles {
  std::vector<Vec2> x;
  std::vector<double> value;
};

struct MonolithicSolution {
  Eigen::VectorXd psi;     // cell-major, nk per cell
  Eigen::VectorXd lambda;  // cell-major, nl per cell
  // psibar(f, s): trace value on facet f at parameter s from facet vertex 0 to 1
  std::function<double(Index, double)> psibar;
};

/// Builds and solves the full (psi, lambda, psibar) optimality system as one
/// dense matrix, directly from the three variational equations:
///   sum_p (psi - psi_p) w + zeta (grad psi, grad w) + beta <psi - psibar, w>
///     + (w, lambda)/dt - theta (a w, grad lambda) = 0
///   (psi - psi*, tau)/dt - (a (theta psi + (1 - theta) psi*), grad tau) + <a.n psibar, tau> = 0
///   beta <psibar - psi, xi> + <a.n lambda, xi> = 0
/// Trace unknowns live on the lower-numbered facet of each periodic pair; the
/// partner reads them through the periodic translation. Closed boundary
/// facets carry no advective flux.
inline MonolithicSolution solve_monolithic(const picproj::SimplicialMesh& mesh, int k, int l, double dt, double theta,
                                           double beta, double zeta, const std::function<Vec2(const Vec2&)>& a,
                                           const std::vector<CellParticles>& particles, const Eigen::VectorXd& psi_star) {
  const Index C = mesh.num_cells();
  const int nk = (k + 1) * (k + 2) / 2;
  const int nl = (l + 1) * (l + 2) / 2;
  const int nf = k + 1;
  // master facet and trace unknown offsets
  std::vector<Index> master(mesh.num_facets());
  std::map<Index, Index> trace_offset;
  Index n_trace = 0;
  for (Index f = 0; f < mesh.num_facets(); ++f) {
    const Index g = mesh.periodic_partner(f);
    master[f] = (g != picproj::kNone && g < f) ? g : f;
    if (master[f] == f) {
      trace_offset[f] = n_trace;
      n_trace += nf;
    }
  }
  const Index n_psi = C * nk;
  const Index n_lam = C * nl;
  const Index n = n_psi + n_lam + n_trace;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  // trace basis at a physical point x on facet f (mapped onto the master)
  auto trace_at = [&](Index f, const Vec2& x) {
    const Index m = master[f];
    const Vec2 xm = m == f ? x : Vec2(x + mesh.periodic_translation(f));
    const Vec2 a0 = mesh.vertex(mesh.facet(m)[0]);
    const Vec2 a1 = mesh.vertex(mesh.facet(m)[1]);
    const double s = (xm - a0).dot(a1 - a0) / (a1 - a0).squaredNorm();
    return line_basis(k, s);
  };

  const auto [gx, gw] = gauss_rule(k + l + 4);
  for (Index c = 0; c < C; ++c) {
    const auto& cell = mesh.cell(c);
    const Vec2 p0 = mesh.vertex(cell[0]), p1 = mesh.vertex(cell[1]), p2 = mesh.vertex(cell[2]);
    const CellBasis phi(k, p0, p1, p2);
    const CellBasis tau(l, p0, p1, p2);
    const Index op = c * nk;
    const Index ol = n_psi + c * nl;
    const Eigen::VectorXd star = psi_star.segment(c * nk, nk);

    for (std::size_t p = 0; p < particles[c].x.size(); ++p) {
      const Eigen::VectorXd v = phi.values(particles[c].x[p]);
      A.block(op, op, nk, nk) += v * v.transpose();
      rhs.segment(op, nk) += particles[c].value[p] * v;
    }
    for (int i = 0; i < nk; ++i) {
      for (int j = 0; j < nk; ++j) {
        A(op + i, op + j) += zeta * integrate_triangle(p0, p1, p2, [&](const Vec2& x) {
                               const Eigen::MatrixX2d g = phi.gradients(x);
                               return g.row(i).dot(g.row(j));
                             });
      }
      for (int j = 0; j < nl; ++j) {
        const double g = integrate_triangle(p0, p1, p2, [&](const Vec2& x) {
          return phi.values(x)(i) * tau.values(x)(j) / dt - theta * phi.values(x)(i) * a(x).dot(tau.gradients(x).row(j));
        });
        A(op + i, ol + j) += g;
        A(ol + j, op + i) += g;
      }
    }
    for (int j = 0; j < nl; ++j) {
      rhs(ol + j) += integrate_triangle(p0, p1, p2, [&](const Vec2& x) {
        const double s = star.dot(phi.values(x));
        return s * tau.values(x)(j) / dt + (1 - theta) * s * a(x).dot(tau.gradients(x).row(j));
      });
    }

    // facet terms, edges taken counter-clockwise so the outward normal is (dy, -dx)
    const std::array<Vec2, 3> pts{p0, p1, p2};
    const double orient = ((p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x()) > 0 ? 1.0 : -1.0;
    for (int e = 0; e < 3; ++e) {
      const Vec2 q0 = pts[e], q1 = pts[(e + 1) % 3];
      Index f = picproj::kNone;
      for (const Index cand : mesh.cell_facets(c)) {
        const Vec2 a0 = mesh.vertex(mesh.facet(cand)[0]), a1 = mesh.vertex(mesh.facet(cand)[1]);
        if (((a0 - q0).norm() < 1e-14 && (a1 - q1).norm() < 1e-14) || ((a0 - q1).norm() < 1e-14 && (a1 - q0).norm() < 1e-14)) f = cand;
      }
      const Vec2 d = q1 - q0;
      const double len = d.norm();
      const Vec2 normal = orient * Vec2(d.y(), -d.x()) / len;
      const bool closed = mesh.is_boundary(f) && mesh.boundary_marker(f) == picproj::marker::kClosed;
      const Index ot = n_psi + n_lam + trace_offset.at(master[f]);
      for (int q = 0; q < static_cast<int>(gx.size()); ++q) {
        const Vec2 x = q0 + gx[q] * d;
        const double w = gw[q] * len;
        const Eigen::VectorXd v = phi.values(x);
        const Eigen::VectorXd t = tau.values(x);
        const Eigen::VectorXd xi = trace_at(f, x);
        const double an = closed ? 0.0 : a(x).dot(normal);
        A.block(op, op, nk, nk) += beta * w * v * v.transpose();
        A.block(op, ot, nk, nf) -= beta * w * v * xi.transpose();
        A.block(ot, op, nf, nk) -= beta * w * xi * v.transpose();
        A.block(ot, ot, nf, nf) += beta * w * xi * xi.transpose();
        A.block(ol, ot, nl, nf) += an * w * t * xi.transpose();
        A.block(ot, ol, nf, nl) += an * w * xi * t.transpose();
      }
    }
  }

  const Eigen::VectorXd sol = A.fullPivLu().solve(rhs);
  MonolithicSolution out;
  out.psi = sol.head(n_psi);
  out.lambda = sol.segment(n_psi, n_lam);
  const Eigen::VectorXd trace = sol.tail(n_trace);
  out.psibar = [&mesh, master, trace_offset, trace, k](Index f, double s) {
    const Vec2 x = (1 - s) * mesh.vertex(mesh.facet(f)[0]) + s * mesh.vertex(mesh.facet(f)[1]);
    const Index m = master[f];
    const Vec2 xm = m == f ? x : Vec2(x + mesh.periodic_translation(f));
    const Vec2 a0 = mesh.vertex(mesh.facet(m)[0]);
    const Vec2 a1 = mesh.vertex(mesh.facet(m)[1]);
    const double sm = (xm - a0).dot(a1 - a0) / (a1 - a0).squaredNorm();
    return trace.segment(trace_offset.at(m), k + 1).dot(line_basis(k, sm));
  };
  return out;
}

/// Minimises 1/2 c^T M c - q^T c over the box by trying every assignment of
/// free / lower / upper to the coordinates and keeping the best feasible one.
inline Eigen::VectorXd box_qp_enumerate(const Eigen::MatrixXd& M, const Eigen::VectorXd& q, const Eigen::VectorXd& lo,
                                        const Eigen::VectorXd& hi) {
  const int n = static_cast<int>(q.size());
  int combos = 1;
  for (int i = 0; i < n; ++i) combos *= 3;
  Eigen::VectorXd best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int code = 0; code < combos; ++code) {
    std::vector<int> state(n);
    int rem = code;
    for (int i = 0; i < n; ++i) {
      state[i] = rem % 3;
      rem /= 3;
    }
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    std::vector<int> free;
    for (int i = 0; i < n; ++i) {
      if (state[i] == 1) c(i) = lo(i);
      else if (state[i] == 2) c(i) = hi(i);
      else free.push_back(i);
    }
    if (!free.empty()) {
      const int nf = static_cast<int>(free.size());
      Eigen::MatrixXd Mff(nf, nf);
      Eigen::VectorXd r(nf);
      for (int a = 0; a < nf; ++a) {
        r(a) = q(free[a]);
        for (int j = 0; j < n; ++j)
          if (state[j] != 0) r(a) -= M(free[a], j) * c(j);
        for (int b = 0; b < nf; ++b) Mff(a, b) = M(free[a], free[b]);
      }
      const Eigen::VectorXd y = Mff.ldlt().solve(r);
      for (int a = 0; a < nf; ++a) c(free[a]) = y(a);
    }
    if (((c - lo).array() < -1e-14).any() || ((c - hi).array() > 1e-14).any()) continue;
    const double obj = 0.5 * c.dot(M * c) - q.dot(c);
    if (obj < best_obj) {
      best_obj = obj;
      best = c;
    }
  }
  return best;
}

inline double qp_objective(const Eigen::MatrixXd& M, const Eigen::VectorXd& q, const Eigen::VectorXd& c) {
  return 0.5 * c.dot(M * c) - q.dot(c);
}

/// Bi-periodic unit square mesh.
inline picproj::SimplicialMesh periodic_square(Index n) {
  auto mesh = picproj::build_rectangle_mesh(n, n);
  mesh.set_boundary_markers([](const Vec2&) { return picproj::marker::kPeriodic; });
  const picproj::PeriodicLimits limits[] = {{0, 0.0, 1.0}, {1, 0.0, 1.0}};
  mesh.pair_periodic(limits);
  return mesh;
}

}  // namespace oracle
