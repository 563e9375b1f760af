#pragma once

#include <string>
#include <vector>

#include "sfpca/linalg.hpp"

namespace sfpca {

enum class SchemeKind { hotelling, projection, schur };

struct DeflationScheme {
  SchemeKind kind = SchemeKind::schur;
  // Euclidean-normalize PCs before Hotelling/Projection deflation; ignored by
  // the Schur scheme, which is scale-invariant by construction.
  bool normalize = true;
};

std::string scheme_name(SchemeKind kind);

struct DeflationStep {
  DenseMatrix u;  // effective (post-normalization) left block, n x k
  DenseMatrix v;  // effective right block, p x k
  SchemeKind kind;
  DenseMatrix x_after;
};

struct DeflationState {
  DenseMatrix x_original;
  DenseMatrix x_current;
  std::vector<DeflationStep> history;

  static DeflationState init(DenseMatrix x);
};

// One rank-one deflation step.
//   HD: X - d u v^T with d = u^T X v
//   PD: (I - u u^T) X (I - v v^T)
//   SD: X - (X v)(u^T X) / (u^T X v)
DeflationState deflate_vector(const DeflationState& state, const Vector& u,
                              const Vector& v, DeflationScheme scheme);

// Normalized multi-rank block forms with Gram inverses.
DeflationState deflate_block(const DeflationState& state, const DenseMatrix& u,
                             const DenseMatrix& v, DeflationScheme scheme);

struct OrthogonalityEntry {
  int step;            // 1-based index of the historical component
  int lag;             // 0 = the deflate that removed it, s = s steps later
  SchemeKind kind;     // scheme of the historical step
  double one_way_left;   // ||U_t^T X_{t+lag}||_F
  double one_way_right;  // ||X_{t+lag} V_t||_F
  double two_way;        // ||U_t^T X_{t+lag} V_t||_F
};

struct OrthogonalityReport {
  std::vector<OrthogonalityEntry> entries;
  double max_one_way = 0.0;
  double max_two_way = 0.0;
  // ||X_0||_F, the natural normalizer for the residual norms.
  double x0_norm = 0.0;
  std::string to_json() const;
};

// Certifies one-way / two-way / subsequent orthogonality for every historical
// component against every later deflated matrix.
OrthogonalityReport orthogonality_report(const DeflationState& state);

}  // namespace sfpca
