#pragma once

#include <Eigen/Dense>
#include <memory>

#include "sfpca/errors.hpp"

namespace sfpca {

// Dense row-major matrix of doubles: the universal carrier for data matrices,
// factor blocks, and operators.
using DenseMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Roughness penalty Omega = D^T D built from an interior finite-difference
// operator of the given order (no wraparound), so rank(Omega) = dim - order.
struct DifferencePenalty {
  int dim = 0;
  int order = 2;  // 2 or 4
  DenseMatrix omega;
};

DifferencePenalty build_difference_penalty(int dim, int order);

// S = I + alpha * Omega with cached factorizations. S is symmetric positive
// definite (alpha >= 0, Omega PSD), so all factors exist.
class SmoothingOperator {
 public:
  // Identity smoother (alpha = 0 semantics) of the given dimension.
  static std::shared_ptr<const SmoothingOperator> identity(int dim);
  static std::shared_ptr<const SmoothingOperator> build(
      const DifferencePenalty& omega, double alpha);

  int dim() const { return dim_; }
  double alpha() const { return alpha_; }
  bool is_identity() const { return identity_; }

  const DenseMatrix& s() const { return s_; }
  const DenseMatrix& chol_lower() const { return chol_l_; }
  const DenseMatrix& s_sqrt() const { return s_sqrt_; }
  const DenseMatrix& s_inv_sqrt() const { return s_inv_sqrt_; }
  double min_eigenvalue() const { return min_eig_; }

  // S * m and S^{-1} * m; the identity case skips the work entirely.
  DenseMatrix apply(const DenseMatrix& m) const;
  DenseMatrix solve(const DenseMatrix& m) const;

 private:
  SmoothingOperator() = default;

  int dim_ = 0;
  double alpha_ = 0.0;
  bool identity_ = true;
  DenseMatrix s_, chol_l_, s_sqrt_, s_inv_sqrt_;
  double min_eig_ = 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

using SmootherPtr = std::shared_ptr<const SmoothingOperator>;

// Elementwise ell-1 penalty; the kind enum exists for interface stability but
// only l1 ships.
struct PenaltySpec {
  enum class Kind { l1 } kind = Kind::l1;
  double lambda = 0.0;
};

// Entrywise sign(z) * max(|z| - tau, 0) with exact zeros in the dead zone.
DenseMatrix soft_threshold(const DenseMatrix& z, double tau);
Vector soft_threshold(const Vector& z, double tau);
double soft_threshold(double z, double tau);

struct ThinSvd {
  DenseMatrix u;  // n x r, orthonormal columns
  Vector d;       // r, nonincreasing, nonnegative
  DenseMatrix v;  // p x r, orthonormal columns
};

// Economical SVD m = U diag(d) V^T with r = min(rows, cols).
ThinSvd thin_svd(const DenseMatrix& m);

// sqrt(x^T S x)
double s_norm(const Vector& x, const SmoothingOperator& s);

}  // namespace sfpca
