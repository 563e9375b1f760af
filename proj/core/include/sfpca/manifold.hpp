#pragma once

#include <utility>

#include "sfpca/linalg.hpp"

namespace sfpca {

// Point on the generalized Stiefel manifold {U : U^T S U = I_k}. Construction
// checks feasibility; strict=false tolerates transiently infeasible iterates
// held inside solver loops (e.g. the raw SVD initializer when alpha > 0).
struct StiefelPoint {
  DenseMatrix u;
  SmootherPtr smoother;

  static StiefelPoint make(DenseMatrix u, SmootherPtr smoother,
                           bool strict = true, double tol = 1e-8);

  int n() const { return static_cast<int>(u.rows()); }
  int k() const { return static_cast<int>(u.cols()); }
};

// ||U^T S U - I||_F
double feasibility_residual(const DenseMatrix& u, const SmoothingOperator& s);

// Cholesky retraction: Y = base.u + step, output Y L^{-T} with L L^T = Y^T S Y.
// Throws rank_deficiency_error when Y^T S Y is not positive definite.
StiefelPoint retract(const StiefelPoint& base, const DenseMatrix& step);

// ||D^T S U + U^T S D||_F — zero iff D is tangent at base.
double tangency_residual(const StiefelPoint& base, const DenseMatrix& d);

// Leading k left/right singular vectors of x, deliberately NOT retracted onto
// the generalized manifolds (infeasible when alpha > 0).
std::pair<DenseMatrix, DenseMatrix> init_leading_svd(const DenseMatrix& x, int k);

}  // namespace sfpca
