// Copyright 2026 The revlin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "revlin/arena.hpp"
#include "revlin/error.hpp"
#include "revlin/kernels.hpp"
#include "revlin/program.hpp"

namespace revlin {

/// Buffers of one reversible inversion.
///
/// Forward elimination is restructured so that each subroutine call finishes
/// one row completely: row i pulls its updates from the already-reduced rows
/// 0..i-1 instead of every pivot row pushing into all rows below it. The call
/// therefore writes O(n) cells (row i of R and of P) and its O(n) scratch can
/// be uncomputed, which is what keeps ancilla linear in n.
///
///   A    input, never written
///   R    unit upper triangular rows of the eliminated A (phase 1)
///   P    same row operations applied to the identity (phase 1)
///   Inv  A^-1, assembled bottom-up from R, P (phase 2)
struct InversionPlan {
  std::size_t n = 0;
  MatrixHandle a;
  MatrixHandle r;
  MatrixHandle p;
  MatrixHandle inv;
  // Ancilla (dormant outside their compute-copy-uncompute blocks).
  std::vector<CellId> scratch_row;
  std::vector<CellId> scratch_inv_row;
  std::vector<CellId> multipliers;  // multipliers[j] for j < i, multipliers[i] holds the pivot
  std::vector<CellId> back_row;

  /// Every cell owned by the plan except A.
  std::vector<CellId> owned_cells() const {
    std::vector<CellId> out;
    for (const auto* m : {&r, &p, &inv}) out.insert(out.end(), m->cells().begin(), m->cells().end());
    for (const auto* v : {&scratch_row, &scratch_inv_row, &multipliers, &back_row}) {
      out.insert(out.end(), v->begin(), v->end());
    }
    return out;
  }
};

inline InversionPlan make_inversion_plan(Arena& arena, const MatrixHandle& a) {
  if (a.rows() != a.cols()) throw Error(Errc::kShapeMismatch, "cannot invert a non-square matrix");
  const std::size_t n = a.rows();
  InversionPlan plan;
  plan.n = n;
  plan.a = a;
  plan.r = alloc_matrix(arena, n, n);
  plan.p = alloc_matrix(arena, n, n);
  plan.inv = alloc_matrix(arena, n, n);
  plan.scratch_row = arena.alloc_ancilla(n);
  plan.scratch_inv_row = arena.alloc_ancilla(n);
  plan.multipliers = arena.alloc_ancilla(n);
  plan.back_row = arena.alloc_ancilla(n);
  return plan;
}

inline std::string row_reduce_label(std::size_t i) { return "row_reduce[" + std::to_string(i) + "]"; }

/// Forward phase for row i (0-based): R row i and P row i from A row i and
/// the finished rows above it.
inline RevProgram build_row_reduce(const InversionPlan& plan, std::size_t i) {
  const std::size_t n = plan.n;
  if (i >= n) throw Error(Errc::kShapeMismatch, "row index out of range");
  const auto& s = plan.scratch_row;
  const auto& t = plan.scratch_inv_row;
  const auto& m = plan.multipliers;
  const Rational one(1);

  std::vector<RevProgram> compute;
  for (std::size_t k = 0; k < n; ++k) {
    compute.push_back(RevProgram::prim(Primitive::add_scaled(s[k], plan.a(i, k), one)));
  }
  compute.push_back(RevProgram::prim(Primitive::add_const(t[i], one)));

  for (std::size_t j = 0; j < i; ++j) {
    // R(j,j) is 1 once row j is normalized; the division keeps the multiplier
    // well defined regardless.
    compute.push_back(RevProgram::prim(Primitive::add_div(m[j], s[j], plan.r(j, j))));
    for (std::size_t k = 0; k < n; ++k) {
      compute.push_back(RevProgram::prim(Primitive::sub_mul(s[k], m[j], plan.r(j, k))));
      compute.push_back(RevProgram::prim(Primitive::sub_mul(t[k], m[j], plan.p(j, k))));
    }
  }

  compute.push_back(RevProgram::prim(Primitive::add_scaled(m[i], s[i], one)));
  for (std::size_t k = i; k < n; ++k) {
    compute.push_back(RevProgram::prim(Primitive::unscale(s[k], m[i])));
  }
  for (std::size_t k = 0; k < n; ++k) {
    compute.push_back(RevProgram::prim(Primitive::unscale(t[k], m[i])));
  }

  std::vector<RevProgram> copy;
  for (std::size_t k = 0; k < n; ++k) {
    copy.push_back(RevProgram::prim(Primitive::add_scaled(plan.r(i, k), s[k], one)));
  }
  for (std::size_t k = 0; k < n; ++k) {
    copy.push_back(RevProgram::prim(Primitive::add_scaled(plan.p(i, k), t[k], one)));
  }

  std::vector<CellId> ancilla(s);
  ancilla.insert(ancilla.end(), t.begin(), t.end());
  ancilla.insert(ancilla.end(), m.begin(), m.end());
  return ccu(RevProgram::seq(std::move(compute)), RevProgram::seq(std::move(copy)),
             std::move(ancilla), row_reduce_label(i));
}

/// Backward phase for row i: Inv row i = P row i - sum_{j>i} R(i,j) * Inv row j.
inline RevProgram build_back_substitute(const InversionPlan& plan, std::size_t i) {
  const std::size_t n = plan.n;
  if (i >= n) throw Error(Errc::kShapeMismatch, "row index out of range");
  const auto& u = plan.back_row;
  const Rational one(1);

  std::vector<RevProgram> compute;
  for (std::size_t k = 0; k < n; ++k) {
    compute.push_back(RevProgram::prim(Primitive::add_scaled(u[k], plan.p(i, k), one)));
  }
  for (std::size_t j = i + 1; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      compute.push_back(RevProgram::prim(Primitive::sub_mul(u[k], plan.r(i, j), plan.inv(j, k))));
    }
  }
  std::vector<RevProgram> copy;
  for (std::size_t k = 0; k < n; ++k) {
    copy.push_back(RevProgram::prim(Primitive::add_scaled(plan.inv(i, k), u[k], one)));
  }
  return ccu(RevProgram::seq(std::move(compute)), RevProgram::seq(std::move(copy)), u,
             "back_substitute[" + std::to_string(i) + "]");
}

/// Full inversion: phase 1 (rows 0..n-1) is the compute leg of an outer
/// compute-copy-uncompute block whose copy leg is phase 2 (rows n-1..0)
/// writing Inv. After a forward run only A and Inv are nonzero.
inline std::pair<RevProgram, InversionPlan> build_inverse(Arena& arena, const MatrixHandle& a) {
  InversionPlan plan = make_inversion_plan(arena, a);
  std::vector<RevProgram> phase1;
  std::vector<RevProgram> phase2;
  for (std::size_t i = 0; i < plan.n; ++i) phase1.push_back(build_row_reduce(plan, i));
  for (std::size_t i = plan.n; i-- > 0;) phase2.push_back(build_back_substitute(plan, i));
  RevProgram prog = ccu(RevProgram::seq(std::move(phase1), "eliminate"),
                        RevProgram::seq(std::move(phase2), "back_substitute"), {}, "inverse");
  return {std::move(prog), std::move(plan)};
}

/// Row index of a zero-pivot failure inside a row_reduce block, if `e` is one.
inline std::optional<std::size_t> zero_pivot_row(const Error& e) {
  if (e.code() != Errc::kNonInvertible && e.code() != Errc::kDivideByZero) return std::nullopt;
  static constexpr std::string_view kPrefix = "row_reduce[";
  for (const std::string& label : e.path()) {
    if (label.rfind(kPrefix, 0) == 0) {
      return static_cast<std::size_t>(std::stoul(label.substr(kPrefix.size())));
    }
  }
  return std::nullopt;
}

/// Runs an inversion-bearing program, translating a zero pivot into
/// kSingularPivot with the failing row.
inline ResourceReport run_checked(Arena& arena, const RevProgram& prog,
                                  Direction dir = Direction::kForward) {
  try {
    return run(arena, prog, dir);
  } catch (const Error& e) {
    if (const auto row = zero_pivot_row(e)) {
      throw Error(Errc::kSingularPivot,
                  "zero pivot at row " + std::to_string(*row + 1) +
                      " (a leading principal minor vanishes; elimination does not pivot)",
                  *row);
    }
    throw;
  }
}

}  // namespace revlin
