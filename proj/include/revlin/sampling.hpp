// Copyright 2026 The revlin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "revlin/baselines.hpp"
#include "revlin/matrix.hpp"
#include "revlin/regression.hpp"

namespace revlin {

using Rng = std::mt19937_64;

/// p/q with p in [-9, 9], q in [1, 9].
inline Rational random_rational(Rng& rng, int max_num = 9, int max_den = 9) {
  std::uniform_int_distribution<int> num(-max_num, max_num);
  std::uniform_int_distribution<int> den(1, max_den);
  const int p = num(rng);
  const int q = den(rng);
  Rational r(p, q);
  r.canonicalize();
  return r;
}

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = random_rational(rng);
  return m;
}

/// Random matrix whose leading principal minors are all nonzero (rejection
/// sampling against the non-pivoting oracle).
inline Matrix random_eliminable_matrix(Rng& rng, std::size_t n) {
  for (;;) {
    Matrix m = random_matrix(rng, n, n);
    try {
      oracle_inverse(m, false);
      return m;
    } catch (const Error&) {
    }
  }
}

/// Strictly diagonally dominant, so every leading block is nonsingular.
inline Matrix random_dominant_matrix(Rng& rng, std::size_t n) {
  Matrix m = random_matrix(rng, n, n);
  for (std::size_t i = 0; i < n; ++i) {
    Rational row_sum = 1;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row_sum += abs(m(i, j));
    m(i, i) = sgn(m(i, i)) < 0 ? Rational(-row_sum) : row_sum;
  }
  return m;
}

inline RegressionData random_regression(Rng& rng, std::size_t features, std::size_t points,
                                        bool bias, Rational lambda = 0) {
  const Matrix x = random_matrix(rng, points, features);
  std::vector<Rational> y(points);
  for (auto& v : y) v = random_rational(rng);
  return make_regression_data(x, y, bias, std::move(lambda));
}

}  // namespace revlin
