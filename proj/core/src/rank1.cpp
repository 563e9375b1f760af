#include "sfpca/rank1.hpp"

#include <cmath>

#include "sfpca/manifold.hpp"

namespace sfpca {

namespace {

SmootherPtr ensure(const SmootherPtr& s, int dim) {
  if (!s) return SmoothingOperator::identity(dim);
  if (s->dim() != dim) {
    throw dimension_error("rank1: smoother dim " + std::to_string(s->dim()) +
                          " does not match factor length " + std::to_string(dim));
  }
  return s;
}

// One proximal factor update: gradient step preconditioned by S^{-1},
// soft-threshold, then shrink-only projection back into the S-norm ellipse.
Vector prox_update(const Vector& current, const Vector& gradient, double step,
                   double lambda, const SmoothingOperator& s) {
  Vector trial = current + step * Vector(s.solve(gradient));
  trial = soft_threshold(trial, step * lambda);
  const double norm = s_norm(trial, s);
  if (norm > 1.0) trial /= norm;
  return trial;
}

}  // namespace

double objective_rank1(const DenseMatrix& x, const Vector& u, const Vector& v,
                       const Rank1Config& config) {
  if (u.size() != x.rows() || v.size() != x.cols()) {
    throw dimension_error("objective_rank1: factor lengths do not match the matrix");
  }
  return u.dot(x * v) - config.lambda_u * u.lpNorm<1>() -
         config.lambda_v * v.lpNorm<1>();
}

Rank1Fit fit_rank1(const DenseMatrix& x, const Rank1Config& config) {
  if (x.size() == 0 || x.norm() == 0.0) {
    throw numeric_error("fit_rank1: input matrix is zero");
  }
  if (config.tol <= 0.0 || config.max_outer < 1) {
    throw numeric_error("fit_rank1: invalid tolerance or iteration budget");
  }
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const SmootherPtr s_u = ensure(config.s_u, n);
  const SmootherPtr s_v = ensure(config.s_v, p);

  ThinSvd svd = thin_svd(x);
  const double sigma1 = svd.d(0);
  Vector u = svd.u.col(0);
  Vector v = svd.v.col(0);
  // The leading singular vectors are unit-length in the Euclidean norm but can
  // sit outside the smoothing ellipses; start from a feasible point so the
  // first sweep compares against an attainable objective value.
  const double init_nu = s_norm(u, *s_u);
  const double init_nv = s_norm(v, *s_v);
  if (init_nu > 1.0) u /= init_nu;
  if (init_nv > 1.0) v /= init_nv;

  // Step size 1/L per factor: L = (largest eigenvalue of S^{-1}) * sigma_1(X),
  // i.e. t = lambda_min(S) / sigma_1.
  double t_u = s_u->min_eigenvalue() / sigma1;
  double t_v = s_v->min_eigenvalue() / sigma1;
  const bool backtracking =
      config.step_rule == Rank1Config::StepRule::backtracking;

  Rank1Fit fit;
  fit.objective_trace.reserve(16);
  double prev_objective = objective_rank1(x, u, v, config);

  // One factor update, never accepted when it would lower the maximization
  // objective: the nominal step is tried first, then halved. A sweep that
  // cannot improve at any scale leaves the factor untouched, which stalls the
  // objective and trips the convergence test. The backtracking rule keeps the
  // shrunken step for later sweeps; the spectral rule retries from t = 1/L.
  auto sweep_with = [&](double& step_ref, Vector& factor, const Vector& grad,
                        double lambda, const SmoothingOperator& s, bool is_u) {
    const double f_cur = is_u ? objective_rank1(x, factor, v, config)
                              : objective_rank1(x, u, factor, config);
    double step = step_ref;
    for (int tries = 0; tries < 40 && step > 0.0; ++tries) {
      Vector next = prox_update(factor, grad, step, lambda, s);
      const double f_next = is_u ? objective_rank1(x, next, v, config)
                                 : objective_rank1(x, u, next, config);
      if (f_next >= f_cur) {
        factor = std::move(next);
        if (backtracking) step_ref = step;
        return;
      }
      step *= 0.5;
    }
  };

  int it = 0;
  for (; it < config.max_outer; ++it) {
    sweep_with(t_u, u, Vector(x * v), config.lambda_u, *s_u, true);
    sweep_with(t_v, v, Vector(x.transpose() * u), config.lambda_v, *s_v, false);

    if (u.norm() == 0.0 || v.norm() == 0.0) {
      // Full shrinkage: a legitimate converged answer.
      fit.objective_trace.push_back(0.0);
      fit.converged = true;
      ++it;
      break;
    }
    const double objective = objective_rank1(x, u, v, config);
    if (!std::isfinite(objective)) {
      throw numeric_error("fit_rank1: objective became non-finite");
    }
    fit.objective_trace.push_back(objective);
    if (std::abs(objective - prev_objective) <
        config.tol * std::max(1.0, std::abs(prev_objective))) {
      fit.converged = true;
      ++it;
      break;
    }
    prev_objective = objective;
  }
  fit.iterations = it;

  // Scale nonzero factors out to the ellipse boundary, fix the sign so d >= 0.
  const double nu = s_norm(u, *s_u);
  const double nv = s_norm(v, *s_v);
  if (nu > 0.0) u /= nu;
  if (nv > 0.0) v /= nv;
  double d = (nu > 0.0 && nv > 0.0) ? u.dot(x * v) : 0.0;
  if (d < 0.0) {
    u = -u;
    d = -d;
  }
  fit.u = std::move(u);
  fit.v = std::move(v);
  fit.d = d;
  return fit;
}

}  // namespace sfpca
