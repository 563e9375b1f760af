#include "sfpca/man_sfpca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sfpca {

namespace {

SmootherPtr ensure(const SmootherPtr& s, int dim) {
  if (!s) return SmoothingOperator::identity(dim);
  if (s->dim() != dim) {
    throw dimension_error("fit_manifold: smoother dim " + std::to_string(s->dim()) +
                          " does not match factor length " + std::to_string(dim));
  }
  return s;
}

Vector order_weights(int k, double eps) {
  Vector w(k);
  for (int j = 0; j < k; ++j) w(j) = std::pow(1.0 + eps, k - 1 - j);
  return w;
}

}  // namespace

double objective_manifold(const DenseMatrix& x, const DenseMatrix& u,
                          const DenseMatrix& v, const ManConfig& config) {
  if (u.rows() != x.rows() || v.rows() != x.cols() || u.cols() != v.cols()) {
    throw dimension_error("objective_manifold: factor shapes do not match the matrix");
  }
  const DenseMatrix cross = u.transpose() * x * v;
  double trace = 0.0;
  if (config.order_weight_epsilon > 0.0) {
    const Vector w = order_weights(static_cast<int>(u.cols()),
                                   config.order_weight_epsilon);
    trace = cross.diagonal().dot(w);
  } else {
    trace = cross.trace();
  }
  return trace - config.lambda_u * u.cwiseAbs().sum() -
         config.lambda_v * v.cwiseAbs().sum();
}

std::pair<DenseMatrix, DenseMatrix> canonicalize(const DenseMatrix& u,
                                                 const DenseMatrix& v) {
  if (u.cols() != v.cols()) {
    throw dimension_error("canonicalize: U and V must have the same column count");
  }
  const int k = static_cast<int>(u.cols());

  // One permutation for both sides: |U| columns, lexicographic, descending.
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      const double xa = std::abs(u(i, a));
      const double xb = std::abs(u(i, b));
      if (xa != xb) return xa > xb;
    }
    return false;
  });

  DenseMatrix cu(u.rows(), k), cv(v.rows(), k);
  for (int j = 0; j < k; ++j) {
    cu.col(j) = u.col(order[j]);
    cv.col(j) = v.col(order[j]);
  }

  // Joint per-column sign flips: positives must not be outnumbered; on a tie
  // the first nonzero entry must be nonnegative.
  for (int j = 0; j < k; ++j) {
    int positives = 0, negatives = 0;
    for (Eigen::Index i = 0; i < cu.rows(); ++i) {
      if (cu(i, j) > 0.0) ++positives;
      else if (cu(i, j) < 0.0) ++negatives;
    }
    bool flip = negatives > positives;
    if (negatives == positives) {
      for (Eigen::Index i = 0; i < cu.rows(); ++i) {
        if (cu(i, j) != 0.0) {
          flip = cu(i, j) < 0.0;
          break;
        }
      }
    }
    if (flip) {
      cu.col(j) = -cu.col(j);
      cv.col(j) = -cv.col(j);
    }
  }
  return {std::move(cu), std::move(cv)};
}

MadmmSubResult subproblem_madmm(const DenseMatrix& x, const DenseMatrix& v_fixed,
                                const SmootherPtr& s, double lambda, double rho,
                                double inner_tol, int max_inner,
                                std::optional<MadmmWarm> warm, EngineStats* stats) {
  const DenseMatrix xv = x * v_fixed;  // linear term of the block objective
  const Eigen::Index n = x.rows();
  const Eigen::Index k = v_fixed.cols();

  MadmmWarm state;
  if (warm && warm->w.rows() == n && warm->w.cols() == k) {
    state = std::move(*warm);
  } else {
    state.w = DenseMatrix::Zero(n, k);
    state.z = DenseMatrix::Zero(n, k);
  }

  MadmmSubResult out;
  DenseMatrix u;
  int it = 0;
  for (; it < max_inner; ++it) {
    try {
      u = solve_procrustes(ProcrustesProblem{s, xv, state.w - state.z, rho}, stats);
    } catch (const degenerate_error&) {
      // The smooth block lost rank (e.g. total shrinkage pushed the splitting
      // variables into cancellation). Report the best iterate, unconverged.
      break;
    }
    const DenseMatrix w_prev = state.w;
    state.w = soft_threshold(DenseMatrix(u + state.z), lambda / rho);
    state.z += u - state.w;
    const double primal = (u - state.w).norm();
    const double dual = rho * (state.w - w_prev).norm();
    out.primal_trace.push_back(primal);
    if (primal <= inner_tol && dual <= inner_tol) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.iterations = it;
  out.factor = state.w;  // the sparse iterate is the reported factor
  out.warm = std::move(state);
  return out;
}

ManpgSubResult subproblem_manpg(const DenseMatrix& x, const DenseMatrix& v_fixed,
                                const StiefelPoint& base, double lambda,
                                double trust, double inner_tol, int max_steps,
                                EngineStats* stats) {
  StiefelPoint point = base;
  const DenseMatrix xv = x * v_fixed;

  auto eval = [&](const StiefelPoint& p) {
    // Minimization objective of this block; the other block's penalty is constant.
    return -(p.u.array() * xv.array()).sum() + lambda * p.u.cwiseAbs().sum();
  };

  ManpgSubResult out;
  int stalls = 0;
  int it = 0;
  for (; it < max_steps; ++it) {
    DescentResult dir = solve_descent_direction(
        DescentProblem{xv, point, lambda, trust}, 1e-2 * inner_tol, 1000, stats);
    if (dir.d.norm() <= inner_tol) {
      out.converged = true;
      ++it;
      break;
    }
    ArmijoResult search = armijo_search(point, dir.d, eval, stats);
    if (search.alpha == 0.0) {
      if (++stalls >= 2) {
        out.stalled = true;
        ++it;
        break;
      }
    } else {
      stalls = 0;
    }
    point = std::move(search.next);
  }
  out.iterations = it;
  out.point = std::move(point);
  return out;
}

namespace {

struct OuterLoopState {
  DenseMatrix u, v;
  double objective = 0.0;
};

}  // namespace

BlockFit fit_manifold(const DenseMatrix& x, const ManConfig& config) {
  if (x.size() == 0 || x.norm() == 0.0) {
    throw numeric_error("fit_manifold: input matrix is zero");
  }
  if (config.k < 1 || config.k > std::min(x.rows(), x.cols())) {
    throw dimension_error("fit_manifold: rank k out of range");
  }
  if (config.rho <= 0.0 || config.outer_tol <= 0.0 || config.inner_tol <= 0.0) {
    throw numeric_error("fit_manifold: tolerances and rho must be positive");
  }
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  ManConfig cfg = config;
  cfg.s_u = ensure(config.s_u, n);
  cfg.s_v = ensure(config.s_v, p);

  BlockFit fit;
  auto [u0, v0] = init_leading_svd(x, cfg.k);
  ++fit.stats.svd_calls;
  DenseMatrix u = u0, v = v0;
  const DenseMatrix xt = x.transpose();

  if (cfg.engine != Engine::madmm) {
    // The SVD initializer sits off the smoothed manifolds, where the trace term
    // is inflated; the proximal engines' backtracking compares feasible trial
    // points against the current iterate, so an unattainable baseline would
    // reject every step. A zero-step retraction restores feasibility without
    // changing the initial column spaces. MADMM needs no such help: its
    // Procrustes block is solved from scratch each sweep.
    u = retract(StiefelPoint::make(u, cfg.s_u, /*strict=*/false),
                DenseMatrix::Zero(n, cfg.k))
            .u;
    v = retract(StiefelPoint::make(v, cfg.s_v, /*strict=*/false),
                DenseMatrix::Zero(p, cfg.k))
            .u;
    fit.stats.retraction_calls += 2;
  }

  // Shared trust parameter for the proximal-gradient engines.
  const double sigma1 = thin_svd(x).d(0);
  ++fit.stats.svd_calls;
  const double trust = 1.0 / sigma1;

  std::optional<MadmmWarm> warm_u, warm_v;
  bool inner_all_converged = true;
  double prev_objective = objective_manifold(x, u, v, cfg);

  int sweep = 0;
  bool outer_converged = false;
  for (; sweep < cfg.max_outer; ++sweep) {
    const DenseMatrix u_prev = u, v_prev = v;
    inner_all_converged = true;

    switch (cfg.engine) {
      case Engine::madmm: {
        MadmmSubResult ru =
            subproblem_madmm(x, v, cfg.s_u, cfg.lambda_u, cfg.rho, cfg.inner_tol,
                             cfg.max_inner, std::move(warm_u), &fit.stats);
        u = ru.factor;
        warm_u = std::move(ru.warm);
        inner_all_converged &= ru.converged;
        MadmmSubResult rv =
            subproblem_madmm(xt, u, cfg.s_v, cfg.lambda_v, cfg.rho, cfg.inner_tol,
                             cfg.max_inner, std::move(warm_v), &fit.stats);
        v = rv.factor;
        warm_v = std::move(rv.warm);
        inner_all_converged &= rv.converged;
        break;
      }
      case Engine::manpg:
      case Engine::amanpg: {
        const int steps = cfg.engine == Engine::amanpg ? 1 : cfg.max_inner;
        StiefelPoint pu = StiefelPoint::make(u, cfg.s_u, /*strict=*/false);
        ManpgSubResult ru = subproblem_manpg(x, v, pu, cfg.lambda_u, trust,
                                             cfg.inner_tol, steps, &fit.stats);
        u = ru.point.u;
        inner_all_converged &= !ru.stalled;
        StiefelPoint pv = StiefelPoint::make(v, cfg.s_v, /*strict=*/false);
        ManpgSubResult rv = subproblem_manpg(xt, u, pv, cfg.lambda_v, trust,
                                             cfg.inner_tol, steps, &fit.stats);
        v = rv.point.u;
        inner_all_converged &= !rv.stalled;
        break;
      }
    }

    const double objective = objective_manifold(x, u, v, cfg);
    if (!std::isfinite(objective)) {
      throw numeric_error("fit_manifold: objective became non-finite");
    }
    fit.objective_trace.push_back(objective);

    const double rel_obj = std::abs(objective - prev_objective) /
                           std::max(1.0, std::abs(prev_objective));
    const double rel_factor = ((u - u_prev).norm() + (v - v_prev).norm()) /
                              std::max(1.0, u.norm() + v.norm());
    prev_objective = objective;
    if (rel_obj + rel_factor < cfg.outer_tol) {
      outer_converged = true;
      ++sweep;
      break;
    }
  }
  fit.sweeps = sweep;
  fit.converged = outer_converged && inner_all_converged;

  if (cfg.engine == Engine::madmm) {
    // W carries exact zeros but sits only near the manifold; one final
    // Cholesky retraction reconciles feasibility (zero rows stay zero).
    auto orthonormalize = [&](DenseMatrix& f, const SmootherPtr& s) {
      StiefelPoint zero = StiefelPoint::make(
          DenseMatrix::Zero(f.rows(), f.cols()), s, /*strict=*/false);
      try {
        f = retract(zero, f).u;
        ++fit.stats.retraction_calls;
      } catch (const rank_deficiency_error&) {
        // Fully shrunk factor (huge lambda): keep the degenerate iterate.
        fit.converged = false;
      }
    };
    orthonormalize(u, cfg.s_u);
    orthonormalize(v, cfg.s_v);
  }

  auto [cu, cv] = canonicalize(u, v);
  fit.u = std::move(cu);
  fit.v = std::move(cv);
  fit.d = (fit.u.transpose() * x * fit.v).diagonal();
  return fit;
}

BlockFit fit_amanpg(const DenseMatrix& x, ManConfig config) {
  config.engine = Engine::amanpg;
  return fit_manifold(x, config);
}

}  // namespace sfpca
