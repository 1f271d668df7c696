/*
 * Copyright 2026 The edslab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "edslab/diff.hpp"
#include "edslab/errors.hpp"
#include "edslab/models.hpp"
#include "oracles.hpp"

using namespace edslab;

TEST(Jacobian, IdentityMap) {
  const Vector at = Vector::LinSpaced(4, -1.0, 2.0);
  const Matrix J = diff::jacobian([](const Vector& x) -> Vector { return x; }, at);
  EXPECT_LE((J - Matrix::Identity(4, 4)).norm(), 1e-10);
}

TEST(Jacobian, QuadraticExample) {
  auto f = [](const Vector& x) -> Vector {
    Vector y(2);
    y << x[0] * x[0], x[0] * x[1];
    return y;
  };
  Vector at(2);
  at << 1.0, 2.0;
  Matrix expect(2, 2);
  expect << 2, 0, 2, 1;
  EXPECT_LE((diff::jacobian(f, at) - expect).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Jacobian, ConstantMap) {
  const Matrix J = diff::jacobian([](const Vector&) -> Vector { return Vector::Constant(3, 7.0); }, Vector::Ones(2));
  EXPECT_LE(J.norm(), 1e-10);
}

TEST(Jacobian, NonFiniteOutputNamesCoordinate) {
  auto f = [](const Vector& x) -> Vector {
    Vector y = x;
    if (x[1] > 1.0) y[0] = std::numeric_limits<double>::infinity();
    return y;
  };
  try {
    diff::jacobian(f, Vector::Ones(3));
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_EQ(e.index(), 1);
  }
}

TEST(FDConfig, RejectsNonPositiveSteps) {
  EXPECT_THROW((diff::FDConfig{0.0, 1e-8}).validate(), ConfigurationError);
  EXPECT_THROW((diff::FDConfig{1e-5, -1.0}).validate(), ConfigurationError);
  EXPECT_NO_THROW(diff::FDConfig::second_order().validate());
  EXPECT_DOUBLE_EQ(diff::step_size(100.0, {1e-5, 1e-8}), 1e-3 + 1e-8);
}

TEST(HessianBlock, SeparableQuadratic) {
  auto f = [](const Vector& y) { return y[0] * y[0] + y[1] * y[1]; };
  const Vector at = Vector::Zero(2);
  EXPECT_NEAR(diff::hessian_block(f, {0, 1}, {0, 1}, at)(0, 0), 2.0, 1e-6);
  EXPECT_NEAR(diff::hessian_block(f, {0, 1}, {1, 1}, at)(0, 0), 0.0, 1e-6);
}

TEST(HessianBlock, BilinearCrossTerm) {
  auto f = [](const Vector& y) { return y[0] * y[1]; };
  const Vector at = Vector::Ones(2);
  EXPECT_NEAR(diff::hessian_block(f, {0, 1}, {1, 1}, at)(0, 0), 1.0, 1e-6);
}

TEST(HessianBlock, LinearMapHasNoCurvature) {
  auto f = [](const Vector& y) { return 3.0 * y[0] - 2.0 * y[1] + y[2]; };
  const Matrix H = diff::hessian_block(f, {0, 3}, {0, 3}, Vector::Constant(3, 0.3));
  EXPECT_LE(H.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(HessianBlock, RejectsOutOfRangeSlice) {
  auto f = [](const Vector& y) { return y.squaredNorm(); };
  EXPECT_THROW(diff::hessian_block(f, {1, 3}, {0, 1}, Vector::Zero(3)), ConfigurationError);
}

// Property: diagonal blocks are exactly symmetric and off-diagonal blocks are
// transposes of each other up to truncation error.
class HessianSymmetry : public ::testing::TestWithParam<int> {};

TEST_P(HessianSymmetry, BlocksTranspose) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
  const Matrix M = ref::random_matrix(rng, 5, 5);
  auto f = [M](const Vector& y) { return std::sin(y.dot(M * y)) + 0.1 * y.array().pow(3).sum(); };
  const Vector at = ref::random_matrix(rng, 5, 1, 0.3);
  const Matrix Haa = diff::hessian_block(f, {0, 3}, {0, 3}, at);
  EXPECT_EQ(Haa, Haa.transpose());
  const Matrix Hab = diff::hessian_block(f, {0, 3}, {3, 2}, at);
  const Matrix Hba = diff::hessian_block(f, {3, 2}, {0, 3}, at);
  EXPECT_LE((Hab - Hba.transpose()).cwiseAbs().maxCoeff(), 1e-5);
}

INSTANTIATE_TEST_SUITE_P(RandomMaps, HessianSymmetry, ::testing::Range(1, 6));

TEST(HessianBlock, FromGradientAgreesWithNested) {
  auto f = [](const Vector& y) { return std::exp(0.3 * y[0]) * y[1] * y[1] + y[0] * y[2]; };
  auto g = [](const Vector& y) -> Vector {
    Vector out(3);
    out << 0.3 * std::exp(0.3 * y[0]) * y[1] * y[1] + y[2], 2.0 * std::exp(0.3 * y[0]) * y[1], y[0];
    return out;
  };
  Vector at(3);
  at << 0.2, -0.7, 1.1;
  const Matrix a = diff::hessian_block(f, {0, 3}, {0, 3}, at);
  const Matrix b = diff::hessian_block_from_gradient(g, {0, 3}, {0, 3}, at);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-5);
}

// Stage helpers: derivative hooks of the models against the FD fallbacks.

namespace {

StageFunctions strip_hooks(StageFunctions s) {
  s.cost_gradient = nullptr;
  s.cost_hessian = nullptr;
  s.dynamics_jacobian = nullptr;
  s.dynamics_curvature = nullptr;
  return s;
}

}  // namespace

TEST(StageDerivatives, LQHooksMatchFiniteDifferences) {
  std::mt19937_64 rng(4);
  const LQSpec spec = ref::random_lq_spec(rng, 3, 2);
  const StageFunctions s = lq_stage(spec);
  const StageFunctions fd = strip_hooks(s);
  const Vector x = ref::random_matrix(rng, 3, 1), u = ref::random_matrix(rng, 2, 1),
               d = ref::random_matrix(rng, 3, 1), l = ref::random_matrix(rng, 3, 1);
  const Vector ga = diff::stage_cost_gradient(s, x, u, d), gf = diff::stage_cost_gradient(fd, x, u, d);
  EXPECT_LE((ga - gf).norm(), 1e-6 * (1.0 + ga.norm()));
  const Matrix Ja = diff::stage_dynamics_jacobian(s, x, u, d), Jf = diff::stage_dynamics_jacobian(fd, x, u, d);
  EXPECT_LE((Ja - Jf).norm(), 1e-7 * (1.0 + Ja.norm()));
  const Matrix Ha = diff::stage_lagrangian_hessian(s, x, u, d, l);
  const Matrix Hf = diff::stage_lagrangian_hessian(fd, x, u, d, l);
  EXPECT_LE((Ha - Hf).norm(), 1e-4 * (1.0 + Ha.norm()));
}

TEST(StageDerivatives, QuadrotorHooksMatchFiniteDifferences) {
  QuadrotorParams qp;
  qp.N = 3;
  const ModelInstance m = quadrotor_problem(qp);
  const StageFunctions& s = m.problem.stage(0);
  const StageFunctions fd = strip_hooks(s);
  std::mt19937_64 rng(8);
  const Vector x = quadrotor_hover_state(qp) + ref::random_matrix(rng, 9, 1, 0.2);
  const Vector u = quadrotor_hover_control(qp) + ref::random_matrix(rng, 4, 1, 0.2);
  const Vector d = ref::random_matrix(rng, 9, 1, 0.2);
  const Vector l = ref::random_matrix(rng, 9, 1);
  const Matrix Ja = diff::stage_dynamics_jacobian(s, x, u, d), Jf = diff::stage_dynamics_jacobian(fd, x, u, d);
  EXPECT_LE((Ja - Jf).cwiseAbs().maxCoeff(), 1e-7);
  const Vector ga = diff::stage_cost_gradient(s, x, u, d), gf = diff::stage_cost_gradient(fd, x, u, d);
  EXPECT_LE((ga - gf).cwiseAbs().maxCoeff(), 1e-7);
  const Matrix Ha = diff::stage_lagrangian_hessian(s, x, u, d, l);
  const Matrix Hf = diff::stage_lagrangian_hessian(fd, x, u, d, l);
  EXPECT_LE((Ha - Hf).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_EQ(Ha, Ha.transpose());
}

TEST(StageDerivatives, TerminalQuadratic) {
  TerminalFunctions t;
  t.cost = [](const Vector& x, const Vector& d) { return (x - d).squaredNorm(); };
  Vector x(2), d(2);
  x << 1.0, -2.0;
  d << 0.5, 0.5;
  const Vector g = diff::terminal_cost_gradient(t, x, d);
  Vector expect(4);
  expect << 1.0, -5.0, -1.0, 5.0;
  EXPECT_LE((g - expect).norm(), 1e-8);
  const Matrix H = diff::terminal_cost_hessian(t, x, d);
  Matrix He(4, 4);
  He << 2, 0, -2, 0, 0, 2, 0, -2, -2, 0, 2, 0, 0, -2, 0, 2;
  EXPECT_LE((H - He).cwiseAbs().maxCoeff(), 1e-5);
}
