// Copyright 2026 The revlin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "revlin/arena.hpp"
#include "revlin/error.hpp"
#include "revlin/inversion.hpp"
#include "revlin/kernels.hpp"
#include "revlin/matrix.hpp"
#include "revlin/program.hpp"

namespace revlin {

/// Training data in the column layout: X is d x n (one column per point),
/// Y is 1 x n. With `bias`, the last row of X is all ones and the matching
/// coefficient is the intercept.
struct RegressionData {
  Matrix x;
  Matrix y;
  Rational lambda = 0;
  bool bias = false;

  std::size_t dims() const { return x.rows(); }
  std::size_t points() const { return x.cols(); }

  /// Number of penalized (non-intercept) coefficients.
  std::size_t feature_count() const { return bias ? dims() - 1 : dims(); }

  void validate() const {
    if (x.rows() == 0 || x.cols() == 0) throw Error(Errc::kShapeMismatch, "need d >= 1 and n >= 1");
    if (y.rows() != 1 || y.cols() != x.cols()) {
      throw Error(Errc::kShapeMismatch, "Y must be 1 x n with n = number of columns of X");
    }
    if (sgn(lambda) < 0) throw Error(Errc::kInvalidArgument, "lambda must be nonnegative");
    if (bias) {
      for (std::size_t j = 0; j < x.cols(); ++j) {
        if (x(x.rows() - 1, j) != 1) throw Error(Errc::kInvalidArgument, "bias row must be all ones");
      }
    }
  }
};

/// Builds RegressionData from row-per-point features (n x f) and n targets,
/// transposing into the column layout and appending the ones row for `bias`.
inline RegressionData make_regression_data(const Matrix& points, std::span<const Rational> targets,
                                           bool bias, Rational lambda = 0) {
  if (points.rows() != targets.size()) {
    throw Error(Errc::kShapeMismatch, "feature rows and targets differ in count");
  }
  const std::size_t n = points.rows();
  const std::size_t d = points.cols() + (bias ? 1 : 0);
  lambda.canonicalize();
  RegressionData data{Matrix(d, n), Matrix(1, n), std::move(lambda), bias};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < points.cols(); ++f) data.x(f, i) = points(i, f);
    if (bias) data.x(d - 1, i) = 1;
    data.y(0, i) = targets[i];
  }
  data.validate();
  return data;
}

/// The same problem loaded into arena cells.
struct RegressionProblem {
  MatrixHandle x;
  MatrixHandle y;
  Rational lambda = 0;
  bool bias = false;
};

inline RegressionProblem load_problem(Arena& arena, const RegressionData& data) {
  data.validate();
  RegressionProblem prob{alloc_matrix(arena, data.x.rows(), data.x.cols()),
                         alloc_matrix(arena, 1, data.y.cols()), data.lambda, data.bias};
  prob.lambda.canonicalize();
  load_matrix(arena, prob.x, data.x);
  load_matrix(arena, prob.y, data.y);
  return prob;
}

/// A built fit: the program, where theta lands, and everything else it owns.
struct RegressionBuild {
  RevProgram program;
  MatrixHandle theta;         // d x 1, the only surviving output
  MatrixHandle gram;          // X X^T (+ n lambda I')
  MatrixHandle moment;        // X Y^T
  MatrixHandle theta_work;    // Gram^-1 * moment inside the compute leg
  InversionPlan inversion;
  std::vector<CellId> matmul_ancilla;

  /// Cells to free after a forward run (all zero by then); excludes theta.
  std::vector<CellId> workspace() const {
    std::vector<CellId> out = inversion.owned_cells();
    for (const auto* m : {&gram, &moment, &theta_work}) {
      out.insert(out.end(), m->cells().begin(), m->cells().end());
    }
    out.insert(out.end(), matmul_ancilla.begin(), matmul_ancilla.end());
    return out;
  }
};

namespace detail {

inline RegressionBuild build_normal_equations(Arena& arena, const RegressionProblem& prob,
                                              bool regularize) {
  const std::size_t d = prob.x.rows();
  const std::size_t n = prob.x.cols();
  if (d == 0 || n == 0 || prob.y.rows() != 1 || prob.y.cols() != n) {
    throw Error(Errc::kShapeMismatch, "X must be d x n and Y 1 x n");
  }

  RegressionBuild out;
  out.gram = alloc_matrix(arena, d, d);
  out.moment = alloc_matrix(arena, d, 1);
  out.theta_work = alloc_matrix(arena, d, 1);
  out.theta = alloc_matrix(arena, d, 1);

  // W = X^T, so W^T W = X X^T and W^T T = X Y^T; both through views.
  std::vector<RevProgram> compute;
  compute.push_back(build_matmul(arena, prob.x, transpose_view(prob.x), out.gram));
  if (regularize) {
    const std::size_t penalized = prob.bias ? d - 1 : d;
    compute.push_back(build_add_scaled_identity(leading_block(out.gram, penalized, penalized),
                                                Rational(n) * prob.lambda));
  }
  auto [inverse, plan] = build_inverse(arena, out.gram);
  out.inversion = std::move(plan);
  compute.push_back(std::move(inverse));
  compute.push_back(build_matmul(arena, prob.x, transpose_view(prob.y), out.moment));
  compute.push_back(build_matmul(arena, out.inversion.inv, out.moment, out.theta_work));

  std::vector<RevProgram> copy;
  for (std::size_t i = 0; i < d; ++i) {
    copy.push_back(RevProgram::prim(
        Primitive::add_scaled(out.theta(i, 0), out.theta_work(i, 0), Rational(1))));
  }
  RevProgram compute_leg = RevProgram::seq(std::move(compute), "normal_equations");
  RevProgram copy_leg = RevProgram::seq(std::move(copy), "export_theta");
  for (const CellId c : collect_ancilla(compute_leg)) {
    bool owned_by_inverse = false;
    for (const auto* v : {&out.inversion.scratch_row, &out.inversion.scratch_inv_row,
                          &out.inversion.multipliers, &out.inversion.back_row}) {
      for (const CellId x : *v) owned_by_inverse = owned_by_inverse || x == c;
    }
    if (!owned_by_inverse) out.matmul_ancilla.push_back(c);
  }
  out.program = ccu(std::move(compute_leg), std::move(copy_leg), {}, regularize ? "ridge" : "ols");
  return out;
}

}  // namespace detail

/// theta = (X X^T)^-1 X Y^T, i.e. (W^T W)^-1 W^T T with W = X^T.
inline RegressionBuild build_ols(Arena& arena, const RegressionProblem& prob) {
  if (sgn(prob.lambda) != 0) {
    throw Error(Errc::kInvalidArgument, "build_ols needs lambda = 0; use build_ridge");
  }
  return detail::build_normal_equations(arena, prob, false);
}

/// theta = (X X^T + n lambda I')^-1 X Y^T, where I' is the identity with the
/// intercept coordinate zeroed when the problem has a bias row.
inline RegressionBuild build_ridge(Arena& arena, const RegressionProblem& prob) {
  if (sgn(prob.lambda) < 0) throw Error(Errc::kInvalidArgument, "lambda must be nonnegative");
  if (sgn(prob.lambda) == 0) return build_ols(arena, prob);
  return detail::build_normal_equations(arena, prob, true);
}

struct FittedModel {
  MatrixHandle theta;
  std::vector<Rational> coefficients;  // all d entries, intercept last when bias
  Rational theta0 = 0;
  bool bias = false;
  ResourceReport report;

  /// Coefficients of the real features (intercept excluded).
  std::span<const Rational> feature_coefficients() const {
    return std::span<const Rational>(coefficients).first(bias ? coefficients.size() - 1
                                                              : coefficients.size());
  }
};

inline FittedModel read_model(const Arena& arena, const RegressionBuild& build, bool bias,
                              const ResourceReport& report) {
  FittedModel model;
  model.theta = build.theta;
  model.bias = bias;
  model.report = report;
  for (std::size_t i = 0; i < build.theta.rows(); ++i) {
    model.coefficients.push_back(arena.read(build.theta(i, 0)));
  }
  if (bias) model.theta0 = model.coefficients.back();
  return model;
}

/// Build, run forward, read theta, then free the (zeroed) workspace. Throws
/// kSingularPivot when the Gram matrix cannot be inverted without pivoting.
inline FittedModel fit(Arena& arena, const RegressionProblem& prob) {
  RegressionBuild build = build_ridge(arena, prob);
  const ResourceReport report = run_checked(arena, build.program);
  FittedModel model = read_model(arena, build, prob.bias, report);
  arena.free(build.workspace());
  return model;
}

/// (1/n) sum_i (theta . x_i + theta0 - y_i)^2 over the columns x_i of X.
inline Rational evaluate_loss(const RegressionData& data, std::span<const Rational> theta,
                              const Rational& theta0) {
  if (theta.size() != data.dims() || data.y.cols() != data.points()) {
    throw Error(Errc::kShapeMismatch, "theta length must equal the number of rows of X");
  }
  Rational total = 0;
  for (std::size_t i = 0; i < data.points(); ++i) {
    Rational residual = theta0 - data.y(0, i);
    for (std::size_t j = 0; j < data.dims(); ++j) residual += theta[j] * data.x(j, i);
    total += residual * residual;
  }
  return total / Rational(data.points());
}

/// Squared norm of the penalized coordinates (the intercept is never penalized).
inline Rational penalty_norm(const RegressionData& data, std::span<const Rational> theta) {
  Rational norm = 0;
  for (std::size_t j = 0; j < data.feature_count() && j < theta.size(); ++j) {
    norm += theta[j] * theta[j];
  }
  return norm;
}

/// evaluate_loss + lambda * ||theta||^2, intercept excluded from the norm.
inline Rational evaluate_ridge_loss(const RegressionData& data, std::span<const Rational> theta,
                                    const Rational& theta0) {
  return evaluate_loss(data, theta, theta0) + data.lambda * penalty_norm(data, theta);
}

inline Rational evaluate_loss(const RegressionData& data, const FittedModel& model) {
  return evaluate_loss(data, model.coefficients, 0);
}

inline Rational evaluate_ridge_loss(const RegressionData& data, const FittedModel& model) {
  return evaluate_ridge_loss(data, model.coefficients, 0);
}

/// h(x) = theta . x + theta0, with x holding only the real features.
inline Rational predict(std::span<const Rational> x, const FittedModel& model) {
  const auto theta = model.feature_coefficients();
  if (x.size() != theta.size()) {
    throw Error(Errc::kShapeMismatch, "expected " + std::to_string(theta.size()) + " features");
  }
  Rational out = model.theta0;
  for (std::size_t j = 0; j < x.size(); ++j) out += theta[j] * x[j];
  return out;
}

}  // namespace revlin
