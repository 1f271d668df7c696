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

#include "edslab/kkt.hpp"
#include "edslab/problem.hpp"
#include "edslab/types.hpp"

namespace edslab {

/// Primal-dual steady state of min l(x, u; d) s.t. x = f(x, u; d).
struct SteadyState {
  Vector x;
  Vector u;
  Vector lambda;
  Vector lambda_minus1;  // filled by build_ti_costs
  double residual = 0.0;
  int iterations = 0;
};

/// [grad_x l + (A - I)^T lambda; grad_u l + B^T lambda; f - x]
Vector steady_state_residual(const StageFunctions& stage, const Vector& d, const Vector& x, const Vector& u,
                             const Vector& lambda);

/// Newton's method on the steady-state first-order conditions, with
/// backtracking on the residual norm. Throws NonconvergenceError.
SteadyState solve_steady_state(const StageFunctions& stage, const Vector& d, const Vector& x0, const Vector& u0,
                               const SolveOptions& opts = {});

/// Boundary costs that make the constant steady-state trajectory optimal:
///   l_b(x) = -((I - T^+ T) lambda^s)^T x
///   l_f(x) = (x - x^s)^T Q (x - x^s) + (lambda^s)^T x
/// and lambda^s_{-1} = (T^T)^+ (lambda_b + lambda^s).
struct TimeInvariantCosts {
  TerminalFunctions initial;   // l_b on (x_0; d_0)
  TerminalFunctions terminal;  // l_f on (x_N; d_N)
  Vector lambda_b;             // gradient of l_b
  Vector lambda_minus1;
};

/// Throws RegularityError when lambda_b + lambda^s is not in the range of T^T (1e-8).
TimeInvariantCosts build_ti_costs(const SteadyState& ss, const Matrix& Q, const Matrix& T);

/// Horizon-N problem with the stage oracle at every stage, l_b added to stage 0
/// and l_f as terminal cost.
DOProblem make_time_invariant_problem(const StageFunctions& stage, const TimeInvariantCosts& costs, const Matrix& T,
                                      int N, int nu, int nd);

/// d_{-1} = T x^s, d_i = d^s.
DataTrajectory steady_state_data(const SteadyState& ss, const Matrix& T, const Vector& d_s, int N);

/// x_i = x^s, u_i = u^s, lambda_i = lambda^s, lambda_{-1} = lambda^s_{-1}.
PrimalDualTrajectory steady_state_trajectory(const SteadyState& ss, const Dimensions& dims);

}  // namespace edslab
