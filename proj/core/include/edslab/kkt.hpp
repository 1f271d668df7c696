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

#include <vector>

#include "edslab/errors.hpp"
#include "edslab/problem.hpp"
#include "edslab/types.hpp"

namespace edslab {

/// Per-stage linearization of the problem at a primal-dual point.
///
/// Second-derivative blocks differentiate the stage Lagrangian
/// l_i + lambda_i^T f_i, not the bare cost. A, B, G, R, S, F exist for
/// stages 0..N-1; Q and E also hold the terminal stage at index N.
struct StageBlocks {
  Dimensions dims;
  std::vector<Matrix> Q, R, S, E, F, A, B, G;
  Matrix T;
};

StageBlocks linearize(const DOProblem& p, const PrimalDualTrajectory& w, const DataTrajectory& d);

/// Constraint Jacobian; rows [T; stage 0; ...; stage N-1], columns [x_0, u_0, ..., x_N].
Matrix assemble_jacobian(const StageBlocks& blocks);

/// Primal Hessian of the Lagrangian, same column ordering as assemble_jacobian.
Matrix assemble_hessian(const StageBlocks& blocks);

/// Stacked first-order conditions [grad_z L; c(z; d)].
Vector kkt_residual(const DOProblem& p, const PrimalDualTrajectory& w, const DataTrajectory& d);

struct KKTSystem {
  Matrix H;
  Matrix J;
  Vector rhs;  // kkt_residual at the linearization point
};

KKTSystem assemble_kkt_system(const DOProblem& p, const PrimalDualTrajectory& w, const DataTrajectory& d);

struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;
};

/// Bunch-Kaufman factorization of a symmetric indefinite matrix.
class SymmetricIndefiniteFactorization {
 public:
  explicit SymmetricIndefiniteFactorization(const Matrix& K);

  bool singular() const { return singular_; }
  const Inertia& inertia() const { return inertia_; }
  Vector solve(const Vector& rhs) const;

 private:
  Matrix lu_;
  std::vector<int> pivots_;
  Inertia inertia_;
  bool singular_ = false;
};

struct SolveOptions {
  double tol_kkt = 1e-9;
  int max_iter = 100;
  double reg0 = 1e-8;
  double reg_max = 1e-2;
  double ls_beta = 0.5;
  double ls_sigma = 1e-4;

  void validate() const;
};

struct SolveResult {
  PrimalDualTrajectory w;
  int iterations = 0;
  double residual = 0.0;
  double regularization = 0.0;  // largest H shift used
};

class NonconvergenceError : public Error {
 public:
  NonconvergenceError(const std::string& what, PrimalDualTrajectory last, double residual)
      : Error(what), last_(std::move(last)), residual_(residual) {}

  const PrimalDualTrajectory& last_iterate() const { return last_; }
  double residual() const { return residual_; }

 private:
  PrimalDualTrajectory last_;
  double residual_;
};

/// Newton's method on the KKT conditions with inertia-correcting regularization
/// and backtracking on 0.5 ||r||^2.
SolveResult solve_equality_nlp(const DOProblem& p, const DataTrajectory& d, const PrimalDualTrajectory& w0,
                               const SolveOptions& opts = {});

}  // namespace edslab
