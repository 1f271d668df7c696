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

#pragma once

#include <cstdint>
#include <string>

#include "edslab/problem.hpp"
#include "edslab/types.hpp"

namespace edslab {

/// A problem together with its base data and a warm start for the base solve.
struct ModelInstance {
  std::string name;
  DOProblem problem;
  DataTrajectory base_data;
  PrimalDualTrajectory warm_start;
};

// --- Quadrotor ----------------------------------------------------------------

/// State (X, X', Y, Y', Z, Z', gamma, beta, alpha); control (a, w_X, w_Y, w_Z).
struct QuadrotorParams {
  double q = 1.0;  // weight on (Y', Z, Z'); lower q means less observable
  double b = 1.0;  // authority of w_X; lower b means less controllable
  double g = 9.81;
  double dt = 0.1;
  int N = 60;
  double altitude = 0.0;  // hover reference height

  void validate() const;
};

inline constexpr int kQuadrotorStates = 9;
inline constexpr int kQuadrotorControls = 4;

Vector quadrotor_continuous_rhs(const Vector& x, const Vector& u, const QuadrotorParams& params);
/// 9 x 13 Jacobian of the right-hand side in (x, u).
Matrix quadrotor_rhs_jacobian(const Vector& x, const Vector& u, const QuadrotorParams& params);

/// One classical Runge-Kutta step of length dt.
Vector quadrotor_rk4_step(const Vector& x, const Vector& u, const QuadrotorParams& params);
/// 9 x 13 Jacobian of the RK4 step in (x, u), by the chain rule through the stages.
Matrix quadrotor_rk4_jacobian(const Vector& x, const Vector& u, const QuadrotorParams& params);

Vector quadrotor_hover_state(const QuadrotorParams& params);
Vector quadrotor_hover_control(const QuadrotorParams& params);
/// diag(1, 1, 1, q, q, q, 1, 1, 1)
Matrix quadrotor_state_weight(const QuadrotorParams& params);

/// Stage cost (x - d)^T Q (x - d) + (u - u_h)^T (u - u_h), terminal (x - d)^T (x - d),
/// T = I, discrete dynamics by RK4. Base data is the hover reference.
ModelInstance quadrotor_problem(const QuadrotorParams& params);

// --- Linear-quadratic systems -------------------------------------------------

/// Time-invariant LQ data. Stage cost 0.5 (x-d)^T Q (x-d) + 0.5 u^T R u + x^T S u,
/// terminal 0.5 (x-d)^T Qf (x-d), dynamics x+ = A x + B u. Data d_i has size n_x.
struct LQSpec {
  Matrix A, B, Q, R, S, Qf, T;

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B.cols()); }
};

StageFunctions lq_stage(const LQSpec& spec);
TerminalFunctions lq_terminal(const LQSpec& spec);

/// Base data: d_{-1} = x_init, d_i = 0.
ModelInstance make_lq_problem(const LQSpec& spec, int N, const Vector& x_init, std::string name = "lq");

/// Seeded random (A, B) with A rescaled to the requested spectral radius;
/// Q = R = Qf = T = I. Deterministic per seed.
ModelInstance lq_chain(int nx, int nu, int N, double spectral_radius, std::uint64_t seed);

/// A = [[1, 1], [0, 1]], B = [0; 1], Q = R = Qf = T = I, x_init = (1, 0).
LQSpec double_integrator_spec();
ModelInstance double_integrator(int N);

/// min x0^2 + u0^2 + x1^2  s.t. x0 = d_{-1}, x1 = x0 + u0, with d_{-1} = 1.
ModelInstance scalar_oracle();

}  // namespace edslab
