// Shared helpers for the unit and acceptance test binaries: deterministic
// random fixtures, subspace angles, and the brute-force descent-direction
// oracle used to certify the splitting solver.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sfpca/manifold.hpp"
#include "sfpca/simbench.hpp"
#include "sfpca/subsolvers.hpp"

namespace testsupport {

using sfpca::DenseMatrix;
using sfpca::Vector;

inline DenseMatrix random_matrix(int n, int p, std::uint64_t seed) {
  sfpca::NormalSampler rng(seed);
  return rng.gaussian_matrix(n, p);
}

inline Vector random_vector(int n, std::uint64_t seed) {
  sfpca::NormalSampler rng(seed);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.gaussian();
  return v;
}

// n x p matrix with exactly the given singular values (random orthogonal
// factors from QR of Gaussian draws).
inline DenseMatrix matrix_with_spectrum(int n, int p, const Vector& sigma,
                                        std::uint64_t seed) {
  const int r = static_cast<int>(sigma.size());
  const Eigen::MatrixXd qu =
      Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(n, r, seed))
          .householderQ() *
      Eigen::MatrixXd::Identity(n, r);
  const Eigen::MatrixXd qv =
      Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(p, r, seed + 1))
          .householderQ() *
      Eigen::MatrixXd::Identity(p, r);
  return qu * sigma.asDiagonal() * qv.transpose();
}

// Feasible point obtained by retracting a Gaussian matrix from the origin.
inline sfpca::StiefelPoint random_feasible(int n, int k, const sfpca::SmootherPtr& s,
                                           std::uint64_t seed) {
  sfpca::StiefelPoint zero =
      sfpca::StiefelPoint::make(DenseMatrix::Zero(n, k), s, /*strict=*/false);
  return sfpca::retract(zero, random_matrix(n, k, seed));
}

// Largest principal angle (radians) between the column spaces of a and b.
inline double max_principal_angle(const DenseMatrix& a, const DenseMatrix& b) {
  const Eigen::MatrixXd qa =
      Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd(a)).householderQ() *
      Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXd qb =
      Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd(b)).householderQ() *
      Eigen::MatrixXd::Identity(b.rows(), b.cols());
  Eigen::BDCSVD<Eigen::MatrixXd> svd(qa.transpose() * qb);
  const double c = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
  return std::acos(c);
}

// Exact minimizer of the k=1 descent subproblem by active-set enumeration:
// with w = u + d the problem is a strictly convex QP with one linear
// constraint; for the optimal support/sign pattern the pattern-restricted
// equality QP reproduces the optimum, so scanning all 3^n patterns and
// evaluating the true objective at each candidate is exact.
inline double descent_oracle_objective(const sfpca::DescentProblem& p) {
  const int n = static_cast<int>(p.base.u.rows());
  const Vector u = p.base.u.col(0);
  const Vector g = p.grad_term.col(0);
  const Vector su = p.base.smoother->apply(p.base.u).col(0);
  const double t = p.trust;
  const double c = su.dot(u);  // a^T w must stay at u^T S u

  double best = sfpca::descent_objective(p, DenseMatrix::Zero(n, 1));

  std::vector<int> pattern(n, -1);
  const long total = static_cast<long>(std::pow(3.0, n));
  for (long code = 0; code < total; ++code) {
    long rest = code;
    for (int i = 0; i < n; ++i) {
      pattern[i] = static_cast<int>(rest % 3) - 1;  // -1, 0, +1
      rest /= 3;
    }
    // Stationarity of the pattern-restricted QP: w = u + t(g - lambda*sigma)
    // - t*mu*a on the free set, mu chosen to meet the constraint.
    double a_norm2 = 0.0, a_dot_q = 0.0;
    for (int i = 0; i < n; ++i) {
      if (pattern[i] == 0) continue;
      const double q = u(i) + t * (g(i) - p.lambda * pattern[i]);
      a_norm2 += su(i) * su(i);
      a_dot_q += su(i) * q;
    }
    Vector w = Vector::Zero(n);
    if (a_norm2 > 0.0) {
      const double mu = (a_dot_q - c) / (t * a_norm2);
      for (int i = 0; i < n; ++i) {
        if (pattern[i] == 0) continue;
        w(i) = u(i) + t * (g(i) - p.lambda * pattern[i]) - t * mu * su(i);
      }
    } else if (std::abs(c) > 1e-12) {
      continue;  // all-zero w cannot meet the constraint
    }
    if (std::abs(su.dot(w) - c) > 1e-9) continue;  // numerically infeasible
    DenseMatrix d(n, 1);
    d.col(0) = w - u;
    best = std::min(best, sfpca::descent_objective(p, d));
  }
  return best;
}

}  // namespace testsupport
