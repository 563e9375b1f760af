#include "sfpca/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <vector>

namespace sfpca {

namespace {

// Locale-independent double parse of a trimmed field.
double parse_field(const std::string& field, const std::string& path, size_t row) {
  size_t begin = field.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    throw parse_error(path + ": empty field in row " + std::to_string(row + 1));
  }
  size_t end = field.find_last_not_of(" \t\r") + 1;
  double value = 0.0;
  const char* first = field.data() + begin;
  const char* last = field.data() + end;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw parse_error(path + ": non-numeric field '" + field.substr(begin, end - begin) +
                      "' in row " + std::to_string(row + 1));
  }
  return value;
}

}  // namespace

DenseMatrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error(path + ": cannot open for reading");

  std::vector<std::vector<double>> rows;
  std::string line;
  size_t cols = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;  // trailing newline
    std::vector<double> row;
    size_t start = 0;
    while (true) {
      size_t comma = line.find(',', start);
      std::string field = line.substr(start, comma == std::string::npos
                                                 ? std::string::npos
                                                 : comma - start);
      row.push_back(parse_field(field, path, rows.size()));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (rows.empty()) {
      cols = row.size();
    } else if (row.size() != cols) {
      throw parse_error(path + ": ragged row " + std::to_string(rows.size() + 1) +
                        " has " + std::to_string(row.size()) + " fields, expected " +
                        std::to_string(cols));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw parse_error(path + ": empty matrix");

  DenseMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i),
                                        static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

void write_matrix_csv(const std::string& path, const DenseMatrix& m) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw parse_error(path + ": cannot open for writing");
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      std::fputs(buf, out);
      std::fputc(j + 1 == m.cols() ? '\n' : ',', out);
    }
  }
  std::fclose(out);
}

}  // namespace sfpca
