#include "sfpca/subsolvers.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace sfpca {

DenseMatrix solve_procrustes(const ProcrustesProblem& p, EngineStats* stats) {
  if (!p.s) throw dimension_error("solve_procrustes: null smoother");
  if (p.a.rows() != p.s->dim() || p.b.rows() != p.s->dim() ||
      p.a.cols() != p.b.cols()) {
    throw dimension_error("solve_procrustes: operand shape mismatch");
  }
  if (p.rho < 0.0) throw numeric_error("solve_procrustes: rho must be nonnegative");

  // X-hat = S^{-1/2} A B^T where A Delta B^T = thin_svd(S^{-1/2} a + rho S^{1/2} b).
  DenseMatrix m;
  if (p.s->is_identity()) {
    m = p.a + p.rho * p.b;
  } else {
    m = p.s->s_inv_sqrt() * p.a + p.rho * (p.s->s_sqrt() * p.b);
  }
  ThinSvd svd = thin_svd(m);
  if (stats) ++stats->svd_calls;
  const double dmax = svd.d(0);
  const double dmin = svd.d(svd.d.size() - 1);
  if (!(dmax > 0.0) || dmin <= 1e-12 * dmax) {
    throw degenerate_error(
        "solve_procrustes: S^{-1/2}a + rho S^{1/2}b is (numerically) rank "
        "deficient; the optimizer is not unique");
  }
  DenseMatrix polar = svd.u * svd.v.transpose();
  if (p.s->is_identity()) return polar;
  return p.s->s_inv_sqrt() * polar;
}

double procrustes_objective(const ProcrustesProblem& p, const DenseMatrix& x) {
  const DenseMatrix diff = x - p.b;
  const double quad = (diff.transpose() * p.s->apply(diff)).trace();
  return -(x.transpose() * p.a).trace() + 0.5 * p.rho * quad;
}

namespace {

// Solves the tangency-constrained quadratic
//   min -<R, D> + (beta/2) ||D||_F^2  s.t.  D^T S U + U^T S D = 0
// in closed form: beta D = R - S U M where M is the symmetric solution of the
// Lyapunov equation Q M + M Q = R^T S U + U^T S R with Q = U^T S^2 U.
DenseMatrix tangent_quadratic_step(const DenseMatrix& r, const DenseMatrix& su,
                                   const Eigen::MatrixXd& q_evecs,
                                   const Eigen::VectorXd& q_evals, double beta) {
  const Eigen::MatrixXd c = r.transpose() * su + su.transpose() * r;
  const Eigen::MatrixXd c_tilde = q_evecs.transpose() * c * q_evecs;
  Eigen::MatrixXd m_tilde(c.rows(), c.cols());
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      m_tilde(i, j) = c_tilde(i, j) / (q_evals(i) + q_evals(j));
    }
  }
  const Eigen::MatrixXd m = q_evecs * m_tilde * q_evecs.transpose();
  return (r - su * m) / beta;
}

}  // namespace

double descent_objective(const DescentProblem& p, const DenseMatrix& d) {
  return -(p.grad_term.array() * d.array()).sum() +
         d.squaredNorm() / (2.0 * p.trust) +
         p.lambda * (p.base.u + d).cwiseAbs().sum();
}

DescentResult solve_descent_direction(const DescentProblem& p, double tol,
                                      int max_iter, EngineStats* stats) {
  if (p.trust <= 0.0) throw numeric_error("solve_descent_direction: trust must be positive");
  if (p.grad_term.rows() != p.base.u.rows() || p.grad_term.cols() != p.base.u.cols()) {
    throw dimension_error("solve_descent_direction: gradient shape mismatch");
  }
  if (stats) ++stats->descent_solves;

  const DenseMatrix su = p.base.smoother->apply(p.base.u);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      Eigen::MatrixXd(su.transpose() * su));
  if (eig.info() != Eigen::Success) {
    throw numeric_error("solve_descent_direction: Gram eigendecomposition failed");
  }
  const Eigen::MatrixXd q_evecs = eig.eigenvectors();
  const Eigen::VectorXd q_evals = eig.eigenvalues();
  if (q_evals.minCoeff() <= 0.0) {
    throw rank_deficiency_error(
        "solve_descent_direction: base point S-Gram is rank deficient");
  }

  DescentResult out;
  if (p.lambda == 0.0) {
    // Pure closed form, no splitting needed.
    out.d = tangent_quadratic_step(p.grad_term, su, q_evecs, q_evals, 1.0 / p.trust);
    out.iterations = 0;
    return out;
  }

  // Splitting: D carries the tangency constraint (closed form above), E the
  // ell-1 prox, scaled dual Z; penalty sigma matched to the curvature 1/t.
  const double sigma = 1.0 / p.trust;
  const double beta = 1.0 / p.trust + sigma;
  DenseMatrix d = DenseMatrix::Zero(p.base.u.rows(), p.base.u.cols());
  DenseMatrix e = d, z = d;
  bool converged = false;
  int it = 0;
  for (; it < max_iter; ++it) {
    const DenseMatrix r = p.grad_term + sigma * (e - z);
    d = tangent_quadratic_step(r, su, q_evecs, q_evals, beta);
    const DenseMatrix e_prev = e;
    e = soft_threshold(DenseMatrix(p.base.u + d + z), p.lambda / sigma) - p.base.u;
    z += d - e;
    const double primal = (d - e).norm();
    const double dual = sigma * (e - e_prev).norm();
    const double scale = std::max(1.0, d.norm());
    if (primal <= tol * scale && dual <= tol * scale) {
      converged = true;
      ++it;
      break;
    }
  }
  out.converged = converged;
  out.iterations = it;
  out.d = d;
  // The subproblem always admits D = 0; never hand back anything worse.
  if (descent_objective(p, out.d) > descent_objective(p, DenseMatrix::Zero(d.rows(), d.cols()))) {
    out.d.setZero();
  }
  return out;
}

ArmijoResult armijo_search(const StiefelPoint& base, const DenseMatrix& d,
                           const std::function<double(const StiefelPoint&)>& eval,
                           EngineStats* stats) {
  if (d.norm() == 0.0) throw numeric_error("armijo_search: zero direction");
  const double base_objective = eval(base);
  double alpha = 1.0;
  for (int shrink = 0; shrink <= 60; ++shrink) {
    try {
      StiefelPoint trial = retract(base, alpha * d);
      if (stats) ++stats->retraction_calls;
      const double f = eval(trial);
      if (!(f > base_objective)) {  // strict decrease test; ties accept
        return ArmijoResult{alpha, std::move(trial), f};
      }
    } catch (const rank_deficiency_error&) {
      // Step left the chart: treat as a rejected trial and shrink.
    }
    alpha *= 0.8;
  }
  return ArmijoResult{0.0, base, base_objective};
}

}  // namespace sfpca
