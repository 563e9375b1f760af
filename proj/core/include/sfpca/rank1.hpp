#pragma once

#include <vector>

#include "sfpca/linalg.hpp"

namespace sfpca {

struct Rank1Config {
  double lambda_u = 0.0;
  double lambda_v = 0.0;
  SmootherPtr s_u;  // defaulted to identity of the right dim when null
  SmootherPtr s_v;
  int max_outer = 500;
  double tol = 1e-6;
  enum class StepRule { fixed_by_spectral_norm, backtracking };
  StepRule step_rule = StepRule::fixed_by_spectral_norm;
};

struct Rank1Fit {
  Vector u;
  Vector v;
  double d = 0.0;  // u^T X v, >= 0 by sign convention
  std::vector<double> objective_trace;  // maximization objective per sweep
  bool converged = false;
  int iterations = 0;
};

// u^T X v - lambda_u ||u||_1 - lambda_v ||v||_1
double objective_rank1(const DenseMatrix& x, const Vector& u, const Vector& v,
                       const Rank1Config& config);

// Alternating proximal scheme for the rank-one problem over the S-norm unit
// ellipses. Zero collapse of a factor is a valid converged answer with d = 0.
Rank1Fit fit_rank1(const DenseMatrix& x, const Rank1Config& config);

}  // namespace sfpca
