// Copyright 2026 The revlin Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference computations used only by tests. Nothing here calls
// into the reversible engine.

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "revlin/matrix.hpp"

namespace revlin::testing {

inline Matrix adjugate_inverse_2x2(const Matrix& a) {
  const Rational det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  Matrix inv(2, 2);
  inv(0, 0) = a(1, 1) / det;
  inv(0, 1) = -a(0, 1) / det;
  inv(1, 0) = -a(1, 0) / det;
  inv(1, 1) = a(0, 0) / det;
  return inv;
}

/// Cofactor expansion along the first row. Exponential; small n only.
inline Rational determinant(const Matrix& a) {
  const std::size_t n = a.rows();
  if (n == 1) return a(0, 0);
  Rational det = 0;
  for (std::size_t col = 0; col < n; ++col) {
    Matrix minor(n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i) {
      std::size_t jj = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == col) continue;
        minor(i - 1, jj++) = a(i, j);
      }
    }
    const Rational term = a(0, col) * determinant(minor);
    det += (col % 2 == 0) ? term : Rational(-term);
  }
  return det;
}

/// Textbook forward elimination without pivoting, each pivot row pushing into
/// the rows below it, rows normalized by their pivot. Returns {R, P} where
/// R is the unit upper triangular result and P the identity transformed alike.
inline std::pair<Matrix, Matrix> push_row_echelon(const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix r = a;
  Matrix p = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    const Rational pivot = r(col, col);
    for (std::size_t k = 0; k < n; ++k) {
      r(col, k) /= pivot;
      p(col, k) /= pivot;
    }
    for (std::size_t i = col + 1; i < n; ++i) {
      const Rational factor = r(i, col);
      for (std::size_t k = 0; k < n; ++k) {
        r(i, k) -= factor * r(col, k);
        p(i, k) -= factor * p(col, k);
      }
    }
  }
  return {r, p};
}

inline std::vector<Rational> mat_vec(const Matrix& m, const std::vector<Rational>& v) {
  std::vector<Rational> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m(i, j) * v[j];
  return out;
}

}  // namespace revlin::testing
