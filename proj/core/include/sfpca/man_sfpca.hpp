#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "sfpca/subsolvers.hpp"

namespace sfpca {

enum class Engine { madmm, manpg, amanpg };

struct ManConfig {
  int k = 1;
  double lambda_u = 0.0;
  double lambda_v = 0.0;
  SmootherPtr s_u;  // identity of the right dim when null
  SmootherPtr s_v;
  Engine engine = Engine::madmm;
  double rho = 1.0;            // MADMM penalty
  double outer_tol = 1e-5;
  int max_outer = 100;
  double inner_tol = 1e-7;
  int max_inner = 1000;
  double order_weight_epsilon = 0.0;  // 0 = plain trace objective
};

struct BlockFit {
  DenseMatrix u;  // n x k
  DenseMatrix v;  // p x k
  Vector d;       // diag(U^T X V)
  std::vector<double> objective_trace;  // maximization objective per outer sweep
  bool converged = false;
  int sweeps = 0;
  EngineStats stats;
};

// Tr(U^T X V D_eps) - lambda_u ||U||_1 - lambda_v ||V||_1, where D_eps is the
// identity when order_weight_epsilon = 0 and diag((1+eps)^{k-1}, ..., 1) else.
double objective_manifold(const DenseMatrix& x, const DenseMatrix& u,
                          const DenseMatrix& v, const ManConfig& config);

// Deterministic resolution of the permutation/sign non-identifiability: one
// permutation applied to the columns of both U and V (sort key: |U| columns,
// lexicographic, descending), then per column a joint sign flip so positives
// outnumber negatives in U's column (ties: first nonzero entry nonnegative).
std::pair<DenseMatrix, DenseMatrix> canonicalize(const DenseMatrix& u,
                                                 const DenseMatrix& v);

// MADMM splitting state carried across outer sweeps (warm start).
struct MadmmWarm {
  DenseMatrix w;
  DenseMatrix z;
};

struct MadmmSubResult {
  DenseMatrix factor;  // the sparse iterate W
  MadmmWarm warm;
  bool converged = false;
  int iterations = 0;
  std::vector<double> primal_trace;  // ||U - W||_F per inner iteration
};

// One MADMM block update: alternating Procrustes / soft-threshold / dual
// ascent for  max Tr(U^T x v_fixed) - lambda ||U||_1  over U^T S U = I.
MadmmSubResult subproblem_madmm(const DenseMatrix& x, const DenseMatrix& v_fixed,
                                const SmootherPtr& s, double lambda, double rho,
                                double inner_tol, int max_inner,
                                std::optional<MadmmWarm> warm,
                                EngineStats* stats = nullptr);

struct ManpgSubResult {
  StiefelPoint point;
  bool converged = false;
  bool stalled = false;
  int iterations = 0;
};

// ManPG block update: repeat {descent direction; Armijo; retract} until the
// direction norm falls under inner_tol. max_steps = 1 gives the A-ManPG
// single-step variant.
ManpgSubResult subproblem_manpg(const DenseMatrix& x, const DenseMatrix& v_fixed,
                                const StiefelPoint& base, double lambda,
                                double trust, double inner_tol, int max_steps,
                                EngineStats* stats = nullptr);

// Outer alternating loop over the U and V blocks with the configured engine.
BlockFit fit_manifold(const DenseMatrix& x, const ManConfig& config);

// Convenience wrapper pinning the single-step engine.
BlockFit fit_amanpg(const DenseMatrix& x, ManConfig config);

}  // namespace sfpca
