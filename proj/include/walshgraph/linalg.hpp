#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "walshgraph/common.hpp"

namespace walshgraph {

// =============================================================================
// Small dense linear algebra
// =============================================================================
//
// Knot chains and renewal systems are a handful of vertices, so a row-major
// matrix plus partial-pivot Gaussian elimination covers everything; tests
// cross-check the stationary distributions with power iteration.

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Real fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  Real& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  Real operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::vector<Real> row(std::size_t i) const {
    return std::vector<Real>(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                             data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

/// y = x^T A (row vector times matrix).
inline std::vector<Real> row_times_matrix(const std::vector<Real>& x, const Matrix& a) {
  std::vector<Real> y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += x[i] * a(i, j);
  return y;
}

/// y = A x (matrix times column vector).
inline std::vector<Real> matrix_times_col(const Matrix& a, const std::vector<Real>& x) {
  std::vector<Real> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Real acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

/// Solve A x = b by Gaussian elimination with partial pivoting.
/// Throws SingularSystem when a pivot degenerates.
inline std::vector<Real> solve_dense(Matrix a, std::vector<Real> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw SingularSystem("solve_dense: shape mismatch");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    Real best = std::abs(a(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const Real v = std::abs(a(r, col));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (!(best > 0.0) || !std::isfinite(best))
      throw SingularSystem("solve_dense: singular pivot at column " + std::to_string(col));
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
      std::swap(b[col], b[pivot]);
    }
    const Real inv = 1.0 / a(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const Real f = a(r, col) * inv;
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      b[r] -= f * b[col];
    }
  }
  std::vector<Real> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    Real acc = b[i];
    for (std::size_t j = i + 1; j < n; ++j) acc -= a(i, j) * x[j];
    x[i] = acc / a(i, i);
  }
  return x;
}

/// max_i |v_i|
inline Real inf_norm(const std::vector<Real>& v) {
  Real m = 0.0;
  for (Real x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace walshgraph
