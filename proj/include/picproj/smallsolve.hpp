#pragma once

#include "picproj/common.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <vector>

namespace picproj {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Symmetric sparse matrix, both triangles stored.
using SparseSym = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Dense solve with partial pivoting. Throws SingularMatrix when a pivot
/// falls below 1e-14 * ||A||_inf.
template <typename Scalar>
DenseVector<Scalar> lu_solve(const DenseMatrix<Scalar>& a, const DenseVector<Scalar>& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw InvalidArgument("lu_solve: dimension mismatch");
  if (a.rows() == 0) return DenseVector<Scalar>(0);
  const Eigen::PartialPivLU<DenseMatrix<Scalar>> lu(a);
  const Scalar scale = a.cwiseAbs().rowwise().sum().maxCoeff();
  const Scalar smallest = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(smallest > Scalar(1e-14) * scale)) throw SingularMatrix("lu_solve: matrix is singular to working precision");
  return lu.solve(b);
}

/// Same factorisation reused for several right-hand sides (columns of b).
template <typename Scalar>
DenseMatrix<Scalar> lu_solve(const DenseMatrix<Scalar>& a, const DenseMatrix<Scalar>& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) throw InvalidArgument("lu_solve: dimension mismatch");
  if (a.rows() == 0) return DenseMatrix<Scalar>(0, b.cols());
  const Eigen::PartialPivLU<DenseMatrix<Scalar>> lu(a);
  const Scalar scale = a.cwiseAbs().rowwise().sum().maxCoeff();
  const Scalar smallest = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(smallest > Scalar(1e-14) * scale)) throw SingularMatrix("lu_solve: matrix is singular to working precision");
  return lu.solve(b);
}

/// Sparse LDL^T with fill-reducing ordering.
VectorX ldl_solve(const SparseSym& a, const VectorX& b);

struct CgResult {
  VectorX x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Diagonally preconditioned conjugate gradients to ||r|| <= tol * ||b||.
/// Throws ConvergenceFailure after max_iterations.
CgResult cg_solve(const SparseSym& a, const VectorX& b, double tol = 1e-10, int max_iterations = -1);

/// min 1/2 c^T M c - c^T q subject to lower <= c <= upper, M symmetric
/// positive definite. Primal active-set method started from the clamped
/// unconstrained minimiser.
template <typename Scalar>
DenseVector<Scalar> box_qp(const DenseMatrix<Scalar>& m, const DenseVector<Scalar>& q, const DenseVector<Scalar>& lower,
                           const DenseVector<Scalar>& upper) {
  const Eigen::Index n = q.size();
  if (m.rows() != n || m.cols() != n || lower.size() != n || upper.size() != n) {
    throw InvalidArgument("box_qp: dimension mismatch");
  }
  if ((lower.array() >= upper.array()).any()) throw InvalidArgument("box_qp: lower bound must be below upper bound");

  enum State : signed char { kFree = 0, kAtLower = -1, kAtUpper = 1 };
  const Eigen::LLT<DenseMatrix<Scalar>> full(m);
  if (full.info() != Eigen::Success) throw SingularMatrix("box_qp: matrix is not positive definite");
  DenseVector<Scalar> c = full.solve(q);
  std::vector<State> state(static_cast<std::size_t>(n), kFree);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (c(i) <= lower(i)) {
      c(i) = lower(i);
      state[i] = kAtLower;
    } else if (c(i) >= upper(i)) {
      c(i) = upper(i);
      state[i] = kAtUpper;
    }
  }

  const int max_iterations = 10 * static_cast<int>(n) + 20;
  for (int iter = 0; iter < max_iterations; ++iter) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (state[i] == kFree) free.push_back(i);
    }
    // minimiser over the free variables with the working set held fixed
    DenseVector<Scalar> target = c;
    if (!free.empty()) {
      const auto nf = static_cast<Eigen::Index>(free.size());
      DenseMatrix<Scalar> mff(nf, nf);
      DenseVector<Scalar> rhs(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        rhs(a) = q(free[a]);
        for (Eigen::Index j = 0; j < n; ++j) {
          if (state[j] != kFree) rhs(a) -= m(free[a], j) * c(j);
        }
        for (Eigen::Index b = 0; b < nf; ++b) mff(a, b) = m(free[a], free[b]);
      }
      const DenseVector<Scalar> sol = Eigen::LLT<DenseMatrix<Scalar>>(mff).solve(rhs);
      for (Eigen::Index a = 0; a < nf; ++a) target(free[a]) = sol(a);
    }

    // longest feasible step towards the target
    Scalar alpha = 1;
    Eigen::Index blocking = -1;
    State blocking_state = kFree;
    for (const Eigen::Index i : free) {
      const Scalar d = target(i) - c(i);
      if (d < 0 && target(i) < lower(i)) {
        const Scalar s = (lower(i) - c(i)) / d;
        if (s < alpha) {
          alpha = s;
          blocking = i;
          blocking_state = kAtLower;
        }
      } else if (d > 0 && target(i) > upper(i)) {
        const Scalar s = (upper(i) - c(i)) / d;
        if (s < alpha) {
          alpha = s;
          blocking = i;
          blocking_state = kAtUpper;
        }
      }
    }
    c += alpha * (target - c);
    if (blocking >= 0) {
      c(blocking) = blocking_state == kAtLower ? lower(blocking) : upper(blocking);
      state[blocking] = blocking_state;
      continue;
    }

    // multiplier check on the working set: g = Mc - q must push into the box
    const DenseVector<Scalar> g = m * c - q;
    // round-off sized multipliers would release a bound that blocks at once
    const Scalar tol = Scalar(1e-13) * (m.cwiseAbs().rowwise().sum().maxCoeff() * std::max(Scalar(1), c.cwiseAbs().maxCoeff()) +
                                        q.cwiseAbs().maxCoeff());
    Eigen::Index release = -1;
    Scalar worst = tol;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar violation = state[i] == kAtLower ? -g(i) : state[i] == kAtUpper ? g(i) : Scalar(0);
      if (violation > worst) {
        worst = violation;
        release = i;
      }
    }
    if (release < 0) return c;
    state[release] = kFree;
  }
  throw ConvergenceFailure("box_qp: active-set iteration did not terminate");
}

template <typename Scalar>
DenseVector<Scalar> box_qp(const DenseMatrix<Scalar>& m, const DenseVector<Scalar>& q, Scalar lower, Scalar upper) {
  const Eigen::Index n = q.size();
  return box_qp<Scalar>(m, q, DenseVector<Scalar>::Constant(n, lower), DenseVector<Scalar>::Constant(n, upper));
}

}  // namespace picproj
