#pragma once

// MatrixMarket (coordinate and array, real, general/symmetric) read/write for
// dense matrices and vectors.

#include "meq/dense.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace meq {

inline void write_matrix_market(const std::string& path, const Matrix& M) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_market: cannot open " + path);
  out << "%%MatrixMarket matrix array real general\n";
  out << M.rows() << " " << M.cols() << "\n";
  char buf[64];
  // Array format is column-major.
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g\n", M(i, j));
      out << buf;
    }
  if (!out) throw std::runtime_error("write_matrix_market: write failed for " + path);
}

inline void write_vector_market(const std::string& path, const Vector& v) {
  write_matrix_market(path, Matrix(v));
}

inline Matrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix_market: cannot open " + path);

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_matrix_market: empty file " + path);
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  std::transform(format.begin(), format.end(), format.begin(), ::tolower);
  std::transform(field.begin(), field.end(), field.begin(), ::tolower);
  std::transform(symmetry.begin(), symmetry.end(), symmetry.begin(), ::tolower);
  if (banner != "%%MatrixMarket" || object != "matrix")
    throw std::runtime_error("read_matrix_market: bad header in " + path);
  if (format != "coordinate" && format != "array")
    throw std::runtime_error("read_matrix_market: unsupported format '" + format + "'");
  if (field != "real" && field != "integer")
    throw std::runtime_error("read_matrix_market: unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric")
    throw std::runtime_error("read_matrix_market: unsupported symmetry '" + symmetry + "'");

  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream ds(line);
  Index rows = 0, cols = 0;
  long long nnz = 0;
  if (format == "coordinate") {
    if (!(ds >> rows >> cols >> nnz))
      throw std::runtime_error("read_matrix_market: bad size line in " + path);
  } else {
    if (!(ds >> rows >> cols))
      throw std::runtime_error("read_matrix_market: bad size line in " + path);
  }
  if (rows < 1 || cols < 1)
    throw std::runtime_error("read_matrix_market: dimensions must be >= 1 in " + path);

  Matrix M = Matrix::Zero(rows, cols);
  if (format == "coordinate") {
    for (long long e = 0; e < nnz; ++e) {
      Index i, j;
      double v;
      if (!(in >> i >> j >> v))
        throw std::runtime_error("read_matrix_market: truncated entries in " + path);
      if (i < 1 || i > rows || j < 1 || j > cols)
        throw std::runtime_error("read_matrix_market: index out of range in " + path);
      M(i - 1, j - 1) = v;
      if (symmetry == "symmetric") M(j - 1, i - 1) = v;
    }
  } else {
    const bool lower_only = symmetry == "symmetric";
    for (Index j = 0; j < cols; ++j)
      for (Index i = lower_only ? j : 0; i < rows; ++i) {
        double v;
        if (!(in >> v))
          throw std::runtime_error("read_matrix_market: truncated entries in " + path);
        M(i, j) = v;
        if (lower_only) M(j, i) = v;
      }
  }
  if (!M.allFinite())
    throw std::runtime_error("read_matrix_market: non-finite entries in " + path);
  return M;
}

inline Vector read_vector_market(const std::string& path) {
  Matrix M = read_matrix_market(path);
  if (M.cols() == 1) return M.col(0);
  if (M.rows() == 1) return M.row(0).transpose();
  throw std::runtime_error("read_vector_market: " + path + " is not a vector");
}

}  // namespace meq
