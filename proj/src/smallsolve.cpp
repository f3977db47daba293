#include "picproj/smallsolve.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace picproj {

VectorX ldl_solve(const SparseSym& a, const VectorX& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw InvalidArgument("ldl_solve: dimension mismatch");
  const Eigen::SparseMatrix<double> col_major = a;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(col_major);
  if (ldlt.info() != Eigen::Success) throw SingularMatrix("ldl_solve: factorisation failed");
  const double scale = ldlt.vectorD().cwiseAbs().maxCoeff();
  if (!(ldlt.vectorD().cwiseAbs().minCoeff() > 1e-14 * scale)) throw SingularMatrix("ldl_solve: zero pivot");
  VectorX x = ldlt.solve(b);
  if (ldlt.info() != Eigen::Success || !x.allFinite()) throw SingularMatrix("ldl_solve: solve failed");
  return x;
}

CgResult cg_solve(const SparseSym& a, const VectorX& b, double tol, int max_iterations) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw InvalidArgument("cg_solve: dimension mismatch");
  CgResult result;
  if (b.norm() == 0.0) {
    result.x = VectorX::Zero(b.size());
    return result;
  }
  Eigen::ConjugateGradient<SparseSym, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(max_iterations > 0 ? max_iterations : static_cast<int>(10 * b.size()));
  cg.compute(a);
  result.x = cg.solve(b);
  result.iterations = static_cast<int>(cg.iterations());
  result.relative_residual = (a * result.x - b).norm() / b.norm();
  if (cg.info() != Eigen::Success || !(result.relative_residual <= 10.0 * tol)) {
    throw ConvergenceFailure("cg_solve: no convergence after " + std::to_string(result.iterations) + " iterations");
  }
  return result;
}

}  // namespace picproj
