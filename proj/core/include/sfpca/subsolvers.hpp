#pragma once

#include <functional>

#include "sfpca/manifold.hpp"

namespace sfpca {

// Portable effort counters threaded through every engine (the published
// timings are hardware-bound; these are the substitute comparison).
struct EngineStats {
  long svd_calls = 0;
  long retraction_calls = 0;
  long descent_solves = 0;

  EngineStats& operator+=(const EngineStats& o) {
    svd_calls += o.svd_calls;
    retraction_calls += o.retraction_calls;
    descent_solves += o.descent_solves;
    return *this;
  }
};

// min over {X: X^T S X = I_k} of  -Tr(X^T a) + (rho/2) ||X - b||_S^2
struct ProcrustesProblem {
  SmootherPtr s;
  DenseMatrix a;  // n x k
  DenseMatrix b;  // n x k
  double rho = 1.0;
};

DenseMatrix solve_procrustes(const ProcrustesProblem& p, EngineStats* stats = nullptr);

double procrustes_objective(const ProcrustesProblem& p, const DenseMatrix& x);

// min over tangent D of  -<G, D> + (1/(2 t)) ||D||_F^2 + lambda ||U + D||_1
// subject to D^T S U + U^T S D = 0.
struct DescentProblem {
  DenseMatrix grad_term;  // G, n x k
  StiefelPoint base;
  double lambda = 0.0;
  double trust = 1.0;  // t
};

struct DescentResult {
  DenseMatrix d;
  bool converged = true;
  int iterations = 0;
};

DescentResult solve_descent_direction(const DescentProblem& p, double tol = 1e-9,
                                      int max_iter = 2000,
                                      EngineStats* stats = nullptr);

// Value of the descent subproblem objective at D (for tests and fallbacks).
double descent_objective(const DescentProblem& p, const DenseMatrix& d);

struct ArmijoResult {
  double alpha = 0.0;     // 0 means the search gave up; next == base then
  StiefelPoint next;
  double objective = 0.0;  // eval(next)
};

// Backtracking line search along d: start at alpha = 1, multiply by 0.8 while
// the retracted objective strictly exceeds the base objective (ties accept);
// give up after 60 shrinks and return the base point with alpha = 0. A
// rank-deficient retraction counts as a rejected trial.
ArmijoResult armijo_search(const StiefelPoint& base, const DenseMatrix& d,
                           const std::function<double(const StiefelPoint&)>& eval,
                           EngineStats* stats = nullptr);

}  // namespace sfpca
