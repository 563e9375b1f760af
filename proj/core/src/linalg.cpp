#include "sfpca/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <string>

namespace sfpca {

DifferencePenalty build_difference_penalty(int dim, int order) {
  if (order != 2 && order != 4) {
    throw dimension_error("difference penalty order must be 2 or 4, got " +
                          std::to_string(order));
  }
  if (dim < order + 1) {
    throw dimension_error("difference penalty needs dim >= order + 1, got dim=" +
                          std::to_string(dim) + " order=" + std::to_string(order));
  }
  // Interior rows of the repeated-difference operator: binomial coefficients
  // with alternating signs, (1,-2,1) or (1,-4,6,-4,1).
  const int rows = dim - order;
  DenseMatrix d = DenseMatrix::Zero(rows, dim);
  std::vector<double> stencil;
  if (order == 2) {
    stencil = {1.0, -2.0, 1.0};
  } else {
    stencil = {1.0, -4.0, 6.0, -4.0, 1.0};
  }
  for (int r = 0; r < rows; ++r) {
    for (int j = 0; j <= order; ++j) d(r, r + j) = stencil[j];
  }
  DifferencePenalty out;
  out.dim = dim;
  out.order = order;
  out.omega = d.transpose() * d;
  // Symmetrize to kill rounding asymmetry from the product.
  out.omega = 0.5 * (out.omega + DenseMatrix(out.omega.transpose()));
  return out;
}

std::shared_ptr<const SmoothingOperator> SmoothingOperator::identity(int dim) {
  if (dim < 1) throw dimension_error("smoother dimension must be positive");
  auto op = std::shared_ptr<SmoothingOperator>(new SmoothingOperator());
  op->dim_ = dim;
  op->alpha_ = 0.0;
  op->identity_ = true;
  op->s_ = DenseMatrix::Identity(dim, dim);
  op->chol_l_ = op->s_;
  op->s_sqrt_ = op->s_;
  op->s_inv_sqrt_ = op->s_;
  op->min_eig_ = 1.0;
  return op;
}

std::shared_ptr<const SmoothingOperator> SmoothingOperator::build(
    const DifferencePenalty& omega, double alpha) {
  if (alpha < 0.0) throw numeric_error("smoother alpha must be nonnegative");
  if (alpha == 0.0) return identity(omega.dim);

  auto op = std::shared_ptr<SmoothingOperator>(new SmoothingOperator());
  const int n = omega.dim;
  op->dim_ = n;
  op->alpha_ = alpha;
  op->identity_ = false;
  op->s_ = DenseMatrix::Identity(n, n) + alpha * omega.omega;
  op->s_ = 0.5 * (op->s_ + DenseMatrix(op->s_.transpose()));

  op->llt_.compute(op->s_);
  if (op->llt_.info() != Eigen::Success) {
    throw numeric_error("smoother Cholesky failed: S = I + alpha*Omega is not "
                        "positive definite (corrupted penalty input)");
  }
  op->chol_l_ = op->llt_.matrixL();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(op->s_);
  if (eig.info() != Eigen::Success) {
    throw numeric_error("smoother eigendecomposition did not converge");
  }
  const Eigen::VectorXd evals = eig.eigenvalues();
  op->min_eig_ = evals.minCoeff();
  if (op->min_eig_ <= 0.0) {
    throw numeric_error("smoother S has a nonpositive eigenvalue: " +
                        std::to_string(op->min_eig_));
  }
  const Eigen::MatrixXd p = eig.eigenvectors();
  op->s_sqrt_ = p * evals.cwiseSqrt().asDiagonal() * p.transpose();
  op->s_inv_sqrt_ = p * evals.cwiseSqrt().cwiseInverse().asDiagonal() * p.transpose();
  return op;
}

DenseMatrix SmoothingOperator::apply(const DenseMatrix& m) const {
  if (m.rows() != dim_) {
    throw dimension_error("smoother apply: expected " + std::to_string(dim_) +
                          " rows, got " + std::to_string(m.rows()));
  }
  if (identity_) return m;
  return s_ * m;
}

DenseMatrix SmoothingOperator::solve(const DenseMatrix& m) const {
  if (m.rows() != dim_) {
    throw dimension_error("smoother solve: expected " + std::to_string(dim_) +
                          " rows, got " + std::to_string(m.rows()));
  }
  if (identity_) return m;
  return llt_.solve(Eigen::MatrixXd(m));
}

double soft_threshold(double z, double tau) {
  const double mag = std::abs(z) - tau;
  if (mag <= 0.0) return 0.0;
  return z > 0.0 ? mag : -mag;
}

DenseMatrix soft_threshold(const DenseMatrix& z, double tau) {
  if (tau < 0.0) throw numeric_error("soft_threshold: tau must be nonnegative");
  return z.unaryExpr([tau](double x) { return soft_threshold(x, tau); });
}

Vector soft_threshold(const Vector& z, double tau) {
  if (tau < 0.0) throw numeric_error("soft_threshold: tau must be nonnegative");
  return z.unaryExpr([tau](double x) { return soft_threshold(x, tau); });
}

ThinSvd thin_svd(const DenseMatrix& m) {
  if (!m.allFinite()) throw numeric_error("thin_svd: input has non-finite entries");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw numeric_error("thin_svd: decomposition did not converge on a " +
                        std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                        " matrix");
  }
  ThinSvd out;
  out.u = svd.matrixU();
  out.d = svd.singularValues();
  out.v = svd.matrixV();
  return out;
}

double s_norm(const Vector& x, const SmoothingOperator& s) {
  if (x.size() != s.dim()) {
    throw dimension_error("s_norm: vector length " + std::to_string(x.size()) +
                          " does not match operator dim " + std::to_string(s.dim()));
  }
  if (s.is_identity()) return x.norm();
  const double q = x.dot(s.s() * x);
  return std::sqrt(std::max(q, 0.0));
}

}  // namespace sfpca
