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

#include <functional>

#include "edslab/problem.hpp"
#include "edslab/types.hpp"

namespace edslab::diff {

/// Central-difference step: h_k = rel_step * max(|x_k|, 1) + abs_floor.
struct FDConfig {
  double rel_step = 1e-5;
  double abs_floor = 1e-8;

  static FDConfig first_order() { return {1e-5, 1e-8}; }
  static FDConfig second_order() { return {1e-4, 1e-8}; }

  void validate() const;
};

using ScalarMap = std::function<double(const Vector&)>;
using VectorMap = std::function<Vector(const Vector&)>;

double step_size(double xk, const FDConfig& cfg);

/// Central-difference Jacobian of `map` at `at`.
Matrix jacobian(const VectorMap& map, const Vector& at, const FDConfig& cfg = FDConfig::first_order());

Vector gradient(const ScalarMap& f, const Vector& at, const FDConfig& cfg = FDConfig::first_order());

/// Mixed second derivative d^2 f / (d a d b) by nested central differences.
/// Diagonal blocks (a == b) are symmetrized.
Matrix hessian_block(const ScalarMap& f, Slice a, Slice b, const Vector& at,
                     const FDConfig& cfg = FDConfig::second_order());

/// Same block, obtained by central differences of an analytic gradient.
Matrix hessian_block_from_gradient(const VectorMap& grad, Slice a, Slice b, const Vector& at,
                                   const FDConfig& cfg = FDConfig::first_order());

// --- Stage-oracle derivatives over the stacked argument y = [x; u; d] --------

/// Value of a stage or terminal oracle as a map of the stacked argument.
ScalarMap stacked_cost(const StageFunctions& s, int nx, int nu);
VectorMap stacked_dynamics(const StageFunctions& s, int nx, int nu);

Vector stage_cost_gradient(const StageFunctions& s, const Vector& x, const Vector& u, const Vector& d);
Matrix stage_dynamics_jacobian(const StageFunctions& s, const Vector& x, const Vector& u, const Vector& d);

/// Hessian in y of l(y) + lambda^T f(y).
Matrix stage_lagrangian_hessian(const StageFunctions& s, const Vector& x, const Vector& u, const Vector& d,
                                const Vector& lambda);

Vector terminal_cost_gradient(const TerminalFunctions& t, const Vector& x, const Vector& d);
Matrix terminal_cost_hessian(const TerminalFunctions& t, const Vector& x, const Vector& d);

}  // namespace edslab::diff
