#include "sfpca/manifold.hpp"

#include <Eigen/Cholesky>
#include <string>

namespace sfpca {

double feasibility_residual(const DenseMatrix& u, const SmoothingOperator& s) {
  if (u.rows() != s.dim()) {
    throw dimension_error("feasibility_residual: factor has " +
                          std::to_string(u.rows()) + " rows, operator dim " +
                          std::to_string(s.dim()));
  }
  const Eigen::Index k = u.cols();
  DenseMatrix gram = u.transpose() * s.apply(u);
  return (gram - DenseMatrix::Identity(k, k)).norm();
}

StiefelPoint StiefelPoint::make(DenseMatrix u, SmootherPtr smoother, bool strict,
                                double tol) {
  if (!smoother) throw dimension_error("StiefelPoint: null smoother");
  if (u.rows() != smoother->dim()) {
    throw dimension_error("StiefelPoint: factor rows " + std::to_string(u.rows()) +
                          " do not match smoother dim " +
                          std::to_string(smoother->dim()));
  }
  if (strict) {
    const double res = feasibility_residual(u, *smoother);
    if (res > tol) {
      throw numeric_error("StiefelPoint: feasibility residual " +
                          std::to_string(res) + " exceeds tolerance " +
                          std::to_string(tol));
    }
  }
  return StiefelPoint{std::move(u), std::move(smoother)};
}

StiefelPoint retract(const StiefelPoint& base, const DenseMatrix& step) {
  if (step.rows() != base.u.rows() || step.cols() != base.u.cols()) {
    throw dimension_error("retract: step shape mismatch");
  }
  const DenseMatrix y = base.u + step;
  const Eigen::MatrixXd gram = y.transpose() * base.smoother->apply(y);
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw rank_deficiency_error(
        "retract: trial point Gram matrix is not positive definite "
        "(step too large or rank-deficient direction)");
  }
  // Y * L^{-T} computed as (L^{-1} Y^T)^T.
  DenseMatrix out =
      llt.matrixL().solve(Eigen::MatrixXd(y.transpose())).transpose();
  return StiefelPoint{std::move(out), base.smoother};
}

double tangency_residual(const StiefelPoint& base, const DenseMatrix& d) {
  if (d.rows() != base.u.rows() || d.cols() != base.u.cols()) {
    throw dimension_error("tangency_residual: direction shape mismatch");
  }
  const DenseMatrix su = base.smoother->apply(base.u);
  const DenseMatrix sym = d.transpose() * su + su.transpose() * d;
  return sym.norm();
}

std::pair<DenseMatrix, DenseMatrix> init_leading_svd(const DenseMatrix& x, int k) {
  if (k < 1 || k > std::min(x.rows(), x.cols())) {
    throw dimension_error("init_leading_svd: k = " + std::to_string(k) +
                          " out of range for " + std::to_string(x.rows()) + "x" +
                          std::to_string(x.cols()));
  }
  ThinSvd svd = thin_svd(x);
  return {svd.u.leftCols(k), svd.v.leftCols(k)};
}

}  // namespace sfpca
