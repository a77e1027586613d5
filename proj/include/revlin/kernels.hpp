// Copyright 2026 The revlin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "revlin/arena.hpp"
#include "revlin/error.hpp"
#include "revlin/matrix.hpp"
#include "revlin/program.hpp"

namespace revlin {

/// A rows x cols grid of arena cells. The cell list is stored row-major in the
/// orientation it was allocated with; `transposed` flips the index mapping so
/// a transpose never moves data.
class MatrixHandle {
 public:
  MatrixHandle() = default;
  MatrixHandle(std::size_t rows, std::size_t cols, std::vector<CellId> cells)
      : rows_(rows), cols_(cols), cells_(std::move(cells)) {
    if (cells_.size() != rows_ * cols_) {
      throw Error(Errc::kShapeMismatch, "handle cell count does not match its shape");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool transposed() const noexcept { return transposed_; }
  const std::vector<CellId>& cells() const noexcept { return cells_; }

  CellId entry(std::size_t i, std::size_t j) const {
    return transposed_ ? cells_[j * rows_ + i] : cells_[i * cols_ + j];
  }
  CellId operator()(std::size_t i, std::size_t j) const { return entry(i, j); }

  friend MatrixHandle transpose_view(const MatrixHandle& m) {
    MatrixHandle t = m;
    std::swap(t.rows_, t.cols_);
    t.transposed_ = !m.transposed_;
    return t;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<CellId> cells_;
  bool transposed_ = false;
};

inline MatrixHandle alloc_matrix(Arena& arena, std::size_t rows, std::size_t cols) {
  return MatrixHandle(rows, cols, arena.alloc(rows * cols));
}

/// Writes values into all-zero cells with AddConst steps.
inline void load_matrix(Arena& arena, const MatrixHandle& m, const Matrix& values) {
  if (values.rows() != m.rows() || values.cols() != m.cols()) {
    throw Error(Errc::kShapeMismatch, "values do not match handle shape");
  }
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (sgn(values(i, j)) != 0) {
        arena.step(Primitive::add_const(m(i, j), values(i, j)), Direction::kForward);
      }
    }
}

/// Exact inverse of load_matrix; leaves the cells zero.
inline void unload_matrix(Arena& arena, const MatrixHandle& m, const Matrix& values) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (sgn(values(i, j)) != 0) {
        arena.step(Primitive::add_const(m(i, j), values(i, j)), Direction::kBackward);
      }
    }
}

inline Matrix read_matrix(const Arena& arena, const MatrixHandle& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = arena.read(m(i, j));
  return out;
}

/// Handle over the leading r x c block of m (no cells copied into the arena).
inline MatrixHandle leading_block(const MatrixHandle& m, std::size_t r, std::size_t c) {
  if (r > m.rows() || c > m.cols()) throw Error(Errc::kShapeMismatch, "block exceeds matrix");
  std::vector<CellId> cells;
  cells.reserve(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) cells.push_back(m(i, j));
  return MatrixHandle(r, c, std::move(cells));
}

inline bool shares_cells(const MatrixHandle& x, const MatrixHandle& y) {
  std::unordered_set<std::uint64_t> seen;
  for (const CellId c : x.cells()) seen.insert(c.key());
  for (const CellId c : y.cells())
    if (seen.count(c.key()) != 0) return true;
  return false;
}

/// C += A * B, with each inner product term produced in one ancilla cell,
/// copied into C(i,j) and immediately uncomputed:
///
///   temp += A(i,k) * B(k,j);  C(i,j) += temp;  temp -= A(i,k) * B(k,j)
///
/// One temp cell serves every (i, j, k), so the program needs O(1) ancilla and
/// exactly 3mnp primitives. C must be zero for C = A * B.
inline RevProgram build_matmul(Arena& arena, const MatrixHandle& a, const MatrixHandle& b,
                               const MatrixHandle& c) {
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols()) {
    throw Error(Errc::kShapeMismatch,
                "cannot multiply " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " by " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                    " into " + std::to_string(c.rows()) + "x" + std::to_string(c.cols()));
  }
  if (shares_cells(c, a) || shares_cells(c, b)) {
    throw Error(Errc::kOverlapError, "output matrix shares cells with an input");
  }
  const CellId temp = arena.alloc_ancilla(1).front();
  const Rational one(1);

  std::vector<RevProgram> body;
  body.reserve(a.rows() * b.cols() * a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      for (std::size_t k = 0; k < a.cols(); ++k) {
        body.push_back(RevProgram::ccu_unchecked(
            RevProgram::prim(Primitive::add_mul(temp, a(i, k), b(k, j))),
            RevProgram::prim(Primitive::add_scaled(c(i, j), temp, one)), {temp}));
      }
  return RevProgram::seq(std::move(body), "matmul");
}

/// G(i,i) += k for every i.
inline RevProgram build_add_scaled_identity(const MatrixHandle& g, const Rational& k) {
  if (!(g.rows() == g.cols())) throw Error(Errc::kShapeMismatch, "matrix is not square");
  std::vector<RevProgram> body;
  body.reserve(g.rows());
  for (std::size_t i = 0; i < g.rows(); ++i) {
    body.push_back(RevProgram::prim(Primitive::add_const(g(i, i), k)));
  }
  return RevProgram::seq(std::move(body), "add_scaled_identity");
}

}  // namespace revlin
