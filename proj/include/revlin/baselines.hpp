// Copyright 2026 The revlin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "revlin/error.hpp"
#include "revlin/matrix.hpp"
#include "revlin/regression.hpp"

namespace revlin {

/// Cost of an ordinary (irreversible) run. destructive_writes is the number
/// of overwrite events, which is the number of values a store-every-step
/// (Lecerf/Bennett style) transform would have to retain.
struct TraceReport {
  std::size_t destructive_writes = 0;
  std::size_t irreversible_ops = 0;
  std::size_t peak_cells_irreversible = 0;
  /// Largest number of distinct cells overwritten by one outer elimination
  /// step (one pivot column); zero for non-elimination oracles.
  std::size_t peak_step_output = 0;
};

template <typename T>
struct OracleResult {
  T value;
  TraceReport trace;
};

/// Triple loop C(i,j) += A(i,k) * B(k,j).
inline OracleResult<Matrix> oracle_matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(Errc::kShapeMismatch, "inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  TraceReport trace;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      for (std::size_t k = 0; k < a.cols(); ++k) {
        c(i, j) += a(i, k) * b(k, j);
        ++trace.destructive_writes;
        trace.irreversible_ops += 2;
      }
  trace.peak_cells_irreversible = a.rows() * a.cols() + b.rows() * b.cols() + c.rows() * c.cols();
  return {std::move(c), trace};
}

/// Gauss-Jordan elimination on [A | I]. Each pivot pushes its row into every
/// other row. Without pivoting a zero pivot raises kZeroPivot (the same
/// condition as the reversible elimination's SingularPivot); with partial
/// pivoting only true singularity raises kSingular.
inline OracleResult<Matrix> oracle_inverse(const Matrix& a, bool pivoting) {
  if (!a.square()) throw Error(Errc::kShapeMismatch, "cannot invert a non-square matrix");
  const std::size_t n = a.rows();
  Matrix work = a;
  Matrix inv = Matrix::identity(n);
  TraceReport trace;
  trace.peak_cells_irreversible = 2 * n * n;

  for (std::size_t col = 0; col < n; ++col) {
    std::set<std::pair<std::size_t, std::size_t>> written;
    auto write = [&](Matrix& m, std::size_t i, std::size_t j, Rational v) {
      m(i, j) = std::move(v);
      ++trace.destructive_writes;
      written.emplace(i + (&m == &inv ? n : 0), j);
    };

    std::size_t pivot_row = col;
    if (sgn(work(col, col)) == 0) {
      if (!pivoting) {
        throw Error(Errc::kZeroPivot, "zero pivot at row " + std::to_string(col + 1), col);
      }
      while (pivot_row < n && sgn(work(pivot_row, col)) == 0) ++pivot_row;
      if (pivot_row == n) throw Error(Errc::kSingular, "matrix is singular", col);
      for (std::size_t k = 0; k < n; ++k) {
        Rational tw = work(col, k), ti = inv(col, k);
        write(work, col, k, work(pivot_row, k));
        write(work, pivot_row, k, tw);
        write(inv, col, k, inv(pivot_row, k));
        write(inv, pivot_row, k, ti);
      }
    }

    const Rational pivot = work(col, col);
    for (std::size_t k = 0; k < n; ++k) {
      write(work, col, k, work(col, k) / pivot);
      write(inv, col, k, inv(col, k) / pivot);
      trace.irreversible_ops += 2;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || sgn(work(i, col)) == 0) continue;
      const Rational factor = work(i, col);
      for (std::size_t k = 0; k < n; ++k) {
        write(work, i, k, work(i, k) - factor * work(col, k));
        write(inv, i, k, inv(i, k) - factor * inv(col, k));
        trace.irreversible_ops += 4;
      }
    }
    trace.peak_step_output = std::max(trace.peak_step_output, written.size());
  }
  return {std::move(inv), trace};
}

/// Solves (X X^T + n lambda I') theta = X Y^T by pivoted elimination, with I'
/// excluding the intercept coordinate when data.bias is set.
inline std::vector<Rational> oracle_ols(const RegressionData& data) {
  data.validate();
  const std::size_t d = data.dims();
  const std::size_t n = data.points();
  Matrix system(d, d + 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t t = 0; t < n; ++t) system(i, j) += data.x(i, t) * data.x(j, t);
    }
    for (std::size_t t = 0; t < n; ++t) system(i, d) += data.x(i, t) * data.y(0, t);
    if (i < data.feature_count()) system(i, i) += Rational(n) * data.lambda;
  }

  for (std::size_t col = 0; col < d; ++col) {
    std::size_t p = col;
    while (p < d && sgn(system(p, col)) == 0) ++p;
    if (p == d) throw Error(Errc::kSingular, "normal equations are singular", col);
    if (p != col) {
      for (std::size_t k = 0; k <= d; ++k) std::swap(system(p, k), system(col, k));
    }
    for (std::size_t i = 0; i < d; ++i) {
      if (i == col || sgn(system(i, col)) == 0) continue;
      const Rational factor = system(i, col) / system(col, col);
      for (std::size_t k = col; k <= d; ++k) system(i, k) -= factor * system(col, k);
    }
  }
  std::vector<Rational> theta(d);
  for (std::size_t i = 0; i < d; ++i) theta[i] = system(i, d) / system(i, i);
  return theta;
}

/// X X^T (+ n lambda I') as a value matrix.
inline Matrix oracle_gram(const RegressionData& data) {
  Matrix g = oracle_matmul(data.x, data.x.transposed()).value;
  for (std::size_t i = 0; i < data.feature_count(); ++i) g(i, i) += Rational(data.points()) * data.lambda;
  return g;
}

/// Irreversible counterpart of the reversible fit: the same three products and
/// one (pivoted) inversion, with their traces summed.
inline TraceReport oracle_ols_trace(const RegressionData& data) {
  TraceReport total;
  auto add = [&](const TraceReport& t) {
    total.destructive_writes += t.destructive_writes;
    total.irreversible_ops += t.irreversible_ops;
    total.peak_cells_irreversible = std::max(total.peak_cells_irreversible, t.peak_cells_irreversible);
    total.peak_step_output = std::max(total.peak_step_output, t.peak_step_output);
  };
  const auto gram = oracle_matmul(data.x, data.x.transposed());
  add(gram.trace);
  Matrix g = gram.value;
  for (std::size_t i = 0; i < data.feature_count(); ++i) {
    g(i, i) += Rational(data.points()) * data.lambda;
    ++total.destructive_writes;
    ++total.irreversible_ops;
  }
  const auto inv = oracle_inverse(g, true);
  add(inv.trace);
  const auto moment = oracle_matmul(data.x, data.y.transposed());
  add(moment.trace);
  add(oracle_matmul(inv.value, moment.value).trace);
  return total;
}

}  // namespace revlin
