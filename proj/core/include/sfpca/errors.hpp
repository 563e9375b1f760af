#pragma once

#include <stdexcept>
#include <string>

namespace sfpca {

// Base class for all library errors.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape mismatch or size precondition violation.
struct dimension_error : error {
  using error::error;
};

// Malformed external input (CSV, JSON).
struct parse_error : error {
  using error::error;
};

// Scenario generator could not satisfy its constraints.
struct generation_error : error {
  using error::error;
};

// Numerical failure: non-convergent decomposition, NaN propagation.
struct numeric_error : error {
  using error::error;
};

// Step left the manifold chart: Gram matrix of the trial point lost rank.
struct rank_deficiency_error : numeric_error {
  using numeric_error::numeric_error;
};

// A matrix that must be inverted is too ill-conditioned; message names it.
struct conditioning_error : numeric_error {
  using numeric_error::numeric_error;
};

// Structurally degenerate input (rank-deficient data, all-zero tuning fits).
struct degenerate_error : numeric_error {
  using numeric_error::numeric_error;
};

}  // namespace sfpca
