// Copyright 2026 The revlin Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "revlin/baselines.hpp"
#include "revlin/regression.hpp"
#include "revlin/sampling.hpp"
#include "support/oracles.hpp"

namespace revlin {
namespace {

FittedModel fit_values(const RegressionData& data, Arena* keep = nullptr) {
  Arena local(ArenaOptions{std::nullopt, true});
  Arena& arena = keep ? *keep : local;
  const RegressionProblem prob = load_problem(arena, data);
  return fit(arena, prob);
}

RegressionData line_data() {
  return make_regression_data(parse_matrix("1\n2\n"), std::vector<Rational>{3, 5}, true);
}

/// (X X^T + n lambda I') theta == X Y^T, exactly.
bool satisfies_normal_equations(const RegressionData& data, const std::vector<Rational>& theta) {
  const Matrix lhs = oracle_gram(data);
  const std::vector<Rational> rhs = testing::mat_vec(data.x, data.y.transposed().data());
  return testing::mat_vec(lhs, theta) == rhs;
}

TEST(Ols, ExactFitWithBias) {
  const RegressionData data = line_data();
  const FittedModel model = fit_values(data);
  ASSERT_EQ(model.coefficients.size(), 2u);
  EXPECT_EQ(model.coefficients[0], 2);
  EXPECT_EQ(model.theta0, 1);
  EXPECT_EQ(evaluate_loss(data, model), 0);
}

TEST(Ols, BiasOnlyModelIsTheMean) {
  const Matrix no_features(3, 0);
  const RegressionData data = make_regression_data(no_features, std::vector<Rational>{1, 2, 6}, true);
  ASSERT_EQ(data.dims(), 1u);
  const FittedModel model = fit_values(data);
  EXPECT_EQ(model.theta0, 3);
  EXPECT_TRUE(model.feature_coefficients().empty());
}

TEST(Ols, RandomProblemMatchesOracle) {
  Rng rng(25);
  const RegressionData data = random_regression(rng, 2, 5, false);
  EXPECT_EQ(fit_values(data).coefficients, oracle_ols(data));
}

TEST(Ols, RejectsNonzeroLambda) {
  Arena arena;
  RegressionData data = line_data();
  data.lambda = 1;
  const RegressionProblem prob = load_problem(arena, data);
  EXPECT_THROW(build_ols(arena, prob), Error);
}

TEST(Ols, SingularGramIsSingularPivot) {
  // Duplicated feature rows make X X^T singular.
  const RegressionData data =
      make_regression_data(parse_matrix("1 1\n2 2\n3 3\n"), std::vector<Rational>{1, 2, 2}, false);
  try {
    fit_values(data);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kSingularPivot);
  }
}

TEST(Ols, OnlyInputsAndThetaRemainAndRoundTrip) {
  Rng rng(90);
  for (int trial = 0; trial < 20; ++trial) {
    const RegressionData data = random_regression(rng, 1 + trial % 3, 4 + trial % 5, trial % 2 == 0);
    Arena arena(ArenaOptions{std::nullopt, true});
    const RegressionProblem prob = load_problem(arena, data);
    const Snapshot loaded = arena.snapshot();
    const RegressionBuild build = build_ols(arena, prob);
    const Snapshot built = arena.snapshot();
    const ResourceReport report = run_checked(arena, build.program);
    EXPECT_EQ(report.garbage_cells, 0u);
    for (const CellId c : build.workspace()) ASSERT_EQ(arena.read(c), 0);
    EXPECT_EQ(read_matrix(arena, prob.x), data.x);
    EXPECT_EQ(read_matrix(arena, prob.y), data.y);

    run_checked(arena, build.program, Direction::kBackward);
    ASSERT_EQ(arena.snapshot(), built);
    arena.free(build.workspace());
    arena.free(build.theta.cells());
    EXPECT_EQ(arena.snapshot(), loaded);
  }
}

TEST(Ridge, ScalarClosedForm) {
  // (W^T W + n lambda)^-1 W^T T = (2 + 2 * 1/2)^-1 * 2.
  RegressionData data =
      make_regression_data(parse_matrix("1\n1\n"), std::vector<Rational>{1, 1}, false, Rational(1, 2));
  EXPECT_EQ(fit_values(data).coefficients, std::vector<Rational>{Rational(2, 3)});
}

TEST(Ridge, LambdaZeroEqualsOls) {
  Rng rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const RegressionData data = random_regression(rng, 1 + trial % 3, 6, trial % 2 == 1);
    Arena a1;
    Arena a2;
    const auto p1 = load_problem(a1, data);
    const auto p2 = load_problem(a2, data);
    const RegressionBuild ridge = build_ridge(a1, p1);
    const RegressionBuild ols = build_ols(a2, p2);
    run_checked(a1, ridge.program);
    run_checked(a2, ols.program);
    ASSERT_EQ(read_matrix(a1, ridge.theta), read_matrix(a2, ols.theta));
  }
}

TEST(Ridge, RescuesSingularOls) {
  RegressionData data =
      make_regression_data(parse_matrix("1 1\n2 2\n3 3\n"), std::vector<Rational>{1, 2, 2}, false);
  for (const Rational& lambda : {Rational(1, 10), Rational(1), Rational(7, 3)}) {
    data.lambda = lambda;
    const FittedModel model = fit_values(data);
    EXPECT_EQ(model.coefficients, oracle_ols(data));
    EXPECT_EQ(model.coefficients[0], model.coefficients[1]);  // symmetric features
  }
}

TEST(Ridge, InterceptIsNotPenalized) {
  // Targets all equal 5: with the intercept free, ridge puts everything there.
  RegressionData data =
      make_regression_data(parse_matrix("1\n2\n3\n"), std::vector<Rational>{5, 5, 5}, true, 4);
  const FittedModel model = fit_values(data);
  EXPECT_EQ(model.coefficients[0], 0);
  EXPECT_EQ(model.theta0, 5);
}

TEST(Ridge, NegativeLambdaRejected) {
  RegressionData data = line_data();
  data.lambda = -1;
  Arena arena;
  EXPECT_THROW(load_problem(arena, data), Error);
}

TEST(NormalEquations, HoldExactlyOnRandomFits) {
  Rng rng(2);
  for (int trial = 0; trial < 60; ++trial) {
    const Rational lambda = trial % 3 == 0 ? Rational(0) : abs(random_rational(rng)) + Rational(1, 10);
    const RegressionData data = random_regression(rng, 1 + trial % 3, 3 + trial % 6, trial % 2 == 0, lambda);
    const FittedModel model = fit_values(data);
    ASSERT_TRUE(satisfies_normal_equations(data, model.coefficients));
  }
}

TEST(Loss, ZeroModelGivesMeanSquare) {
  const RegressionData data = line_data();
  const std::vector<Rational> zero(2);
  EXPECT_EQ(evaluate_loss(data, zero, 0), Rational(17));
  EXPECT_EQ(evaluate_ridge_loss(data, zero, 0), evaluate_loss(data, zero, 0));
}

TEST(Loss, RidgeWithZeroLambdaEqualsPlainLoss) {
  Rng rng(4);
  const RegressionData data = random_regression(rng, 3, 7, false);
  const std::vector<Rational> theta{Rational(1, 2), -2, 3};
  EXPECT_EQ(evaluate_ridge_loss(data, theta, 1), evaluate_loss(data, theta, 1));
}

TEST(Loss, ShapeMismatch) {
  EXPECT_THROW(evaluate_loss(line_data(), std::vector<Rational>{1}, 0), Error);
}

void expect_local_minimum(const RegressionData& data, const FittedModel& model, bool ridge) {
  auto loss = [&](const std::vector<Rational>& t) {
    return ridge ? evaluate_ridge_loss(data, t, 0) : evaluate_loss(data, t, 0);
  };
  const Rational best = loss(model.coefficients);
  for (std::size_t i = 0; i < model.coefficients.size(); ++i) {
    for (const Rational& step : {Rational(1, 10), Rational(-1, 10)}) {
      std::vector<Rational> moved = model.coefficients;
      moved[i] += step;
      ASSERT_LE(best, loss(moved));
    }
  }
}

TEST(Loss, FittedOlsIsMinimalUnderPerturbation) {
  Rng rng(14);
  for (int trial = 0; trial < 40; ++trial) {
    const RegressionData data = random_regression(rng, 1 + trial % 3, 8, trial % 2 == 0);
    expect_local_minimum(data, fit_values(data), false);
  }
}

TEST(Loss, FittedRidgeIsMinimalUnderPerturbation) {
  Rng rng(15);
  for (int trial = 0; trial < 40; ++trial) {
    const RegressionData data =
        random_regression(rng, 1 + trial % 3, 8, trial % 2 == 0, Rational(1 + trial % 4, 3));
    expect_local_minimum(data, fit_values(data), true);
  }
}

TEST(Ridge, PenaltyShrinks) {
  Rng rng(16);
  for (int trial = 0; trial < 40; ++trial) {
    RegressionData data = random_regression(rng, 1 + trial % 3, 7, trial % 2 == 0);
    const FittedModel ols = fit_values(data);
    data.lambda = Rational(1 + trial % 5, 4);
    const FittedModel ridge = fit_values(data);
    ASSERT_LE(penalty_norm(data, ridge.coefficients), penalty_norm(data, ols.coefficients));
  }
}

TEST(Predict, Basics) {
  FittedModel constant;
  constant.coefficients = {0, Rational(7, 2)};
  constant.bias = true;
  constant.theta0 = Rational(7, 2);
  EXPECT_EQ(predict(std::vector<Rational>{100}, constant), Rational(7, 2));
  EXPECT_EQ(predict(std::vector<Rational>{-3}, constant), Rational(7, 2));

  FittedModel line;
  line.coefficients = {2, 1};
  line.bias = true;
  line.theta0 = 1;
  EXPECT_EQ(predict(std::vector<Rational>{3}, line), 7);
  EXPECT_THROW(predict(std::vector<Rational>{1, 2}, line), Error);
}

TEST(Predict, ExactFitReproducesTrainingTargets) {
  // Three points on y = 1/2 x1 - 2 x2 + 3.
  const Matrix points = parse_matrix("1 0\n0 1\n2 3\n4 -1\n");
  std::vector<Rational> y;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    y.push_back(Rational(1, 2) * points(i, 0) - 2 * points(i, 1) + 3);
  }
  const RegressionData data = make_regression_data(points, y, true);
  const FittedModel model = fit_values(data);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    EXPECT_EQ(predict(std::vector<Rational>{points(i, 0), points(i, 1)}, model), y[i]);
  }
  EXPECT_EQ(model.theta0, 3);
}

TEST(Complexity, LinearInPointsWithFixedDimension) {
  auto ops = [](std::size_t d, std::size_t n) {
    Rng rng(d * 1000 + n);
    return static_cast<double>(fit_values(random_regression(rng, d, n, false)).report.primitive_ops);
  };
  const double r1 = ops(3, 40) / ops(3, 20);
  EXPECT_GT(r1, 1.5);
  EXPECT_LT(r1, 2.3);
  const double r2 = ops(4, 24) / ops(2, 24);
  EXPECT_LT(r2, 8.0 + 1.0);
}

}  // namespace
}  // namespace revlin
