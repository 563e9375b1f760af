#pragma once

#include <string>

#include "sfpca/linalg.hpp"

namespace sfpca {

// Plain numeric CSV: comma-separated rows, no header, '.' decimal separator.
// Ragged rows, empty files, and non-numeric fields are parse errors.
DenseMatrix read_matrix_csv(const std::string& path);

// Writes with %.17g so values round-trip exactly.
void write_matrix_csv(const std::string& path, const DenseMatrix& m);

}  // namespace sfpca
