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
#include <vector>

#include "edslab/types.hpp"

namespace edslab {

/// Sizes of a horizon-N dynamic optimization problem.
///
/// Stage indices run over [-1, N]. Stage -1 carries only the initial-state
/// constraint T x_0 = d_{-1}, so its data size is n0 (the row count of T).
struct Dimensions {
  int N = 1;
  int nx = 1;
  int nu = 0;
  int n0 = 0;
  /// nd[i + 1] is the data size at stage i, for i in [-1, N].
  std::vector<int> nd;

  /// Same data size nd at every stage 0..N; stage -1 gets n0.
  static Dimensions uniform(int N, int nx, int nu, int n0, int nd);

  int data_dim(int stage) const { return nd.at(static_cast<std::size_t>(stage + 1)); }

  /// (N+1) nx + N nu
  int primal_size() const { return (N + 1) * nx + N * nu; }
  /// n0 + N nx
  int dual_size() const { return n0 + N * nx; }

  /// Column offsets in the primal ordering [x_0, u_0, x_1, u_1, ..., x_N].
  int x_offset(int i) const { return i * (nx + nu); }
  int u_offset(int i) const { return i * (nx + nu) + nx; }
  /// Row offset of the constraint block owned by lambda_i, i in [-1, N-1].
  int constraint_offset(int i) const { return i < 0 ? 0 : n0 + i * nx; }

  /// Throws ConfigurationError if any invariant is broken.
  void validate() const;

  bool operator==(const Dimensions&) const = default;
};

/// Stage functions for i in [0, N-1]. Every map takes (x_i, u_i, d_i).
///
/// The optional derivative hooks differentiate with respect to the stacked
/// argument y = [x; u; d]. Missing hooks are filled in by finite differences.
struct StageFunctions {
  std::function<double(const Vector&, const Vector&, const Vector&)> cost;
  std::function<Vector(const Vector&, const Vector&, const Vector&)> dynamics;

  std::function<Vector(const Vector&, const Vector&, const Vector&)> cost_gradient;
  std::function<Matrix(const Vector&, const Vector&, const Vector&)> cost_hessian;
  /// n_x by (n_x + n_u + n_d)
  std::function<Matrix(const Vector&, const Vector&, const Vector&)> dynamics_jacobian;
  /// Hessian of lambda^T f(y) in y.
  std::function<Matrix(const Vector&, const Vector&, const Vector&, const Vector&)>
      dynamics_curvature;
};

/// Terminal cost l_N(x_N; d_N); derivative hooks act on y = [x; d].
struct TerminalFunctions {
  std::function<double(const Vector&, const Vector&)> cost;
  std::function<Vector(const Vector&, const Vector&)> cost_gradient;
  std::function<Matrix(const Vector&, const Vector&)> cost_hessian;
};

struct StageOracles {
  std::vector<StageFunctions> stages;  // size N
  TerminalFunctions terminal;
};

/// Data trajectory d_{-1:N}.
struct DataTrajectory {
  std::vector<Vector> d;  // d[i + 1] is d_i

  static DataTrajectory zeros(const Dimensions& dims);

  Vector& at(int stage) { return d.at(static_cast<std::size_t>(stage + 1)); }
  const Vector& at(int stage) const { return d.at(static_cast<std::size_t>(stage + 1)); }
};

/// Primal-dual trajectory w_{-1:N}.
///
/// x_{-1}, u_{-1}, u_N and lambda_N are empty, so stage_block(-1) is lambda_{-1}
/// and stage_block(N) is x_N.
struct PrimalDualTrajectory {
  std::vector<Vector> x;       // x_0 .. x_N
  std::vector<Vector> u;       // u_0 .. u_{N-1}
  std::vector<Vector> lambda;  // lambda[i + 1] is lambda_i, i in [-1, N-1]

  static PrimalDualTrajectory zeros(const Dimensions& dims);

  Vector& lam(int i) { return lambda.at(static_cast<std::size_t>(i + 1)); }
  const Vector& lam(int i) const { return lambda.at(static_cast<std::size_t>(i + 1)); }

  /// w_i = [x_i; u_i; lambda_i] with the empty-vector convention.
  Vector stage_block(int i) const;

  Vector primal() const;
  Vector dual() const;
  void set_primal(const Dimensions& dims, const Eigen::Ref<const Vector>& z);
  void set_dual(const Dimensions& dims, const Eigen::Ref<const Vector>& lam);
};

/// The problem P_{0:N}(d):
///   min  sum_i l_i(x_i, u_i; d_i) + l_N(x_N; d_N)
///   s.t. T x_0 = d_{-1},  x_{i+1} = f_i(x_i, u_i; d_i).
///
/// Immutable after construction.
class DOProblem {
 public:
  DOProblem(Dimensions dims, StageOracles oracles, Matrix T);

  const Dimensions& dims() const { return dims_; }
  const StageOracles& oracles() const { return oracles_; }
  const StageFunctions& stage(int i) const { return oracles_.stages.at(static_cast<std::size_t>(i)); }
  const TerminalFunctions& terminal() const { return oracles_.terminal; }
  const Matrix& T() const { return T_; }

  void check(const DataTrajectory& d) const;
  void check(const PrimalDualTrajectory& w) const;

 private:
  Dimensions dims_;
  StageOracles oracles_;
  Matrix T_;
};

double evaluate_objective(const DOProblem& p, const PrimalDualTrajectory& z, const DataTrajectory& d);

/// [T x_0 - d_{-1}; x_1 - f_0(z_0; d_0); ...; x_N - f_{N-1}(z_{N-1}; d_{N-1})]
Vector evaluate_constraints(const DOProblem& p, const PrimalDualTrajectory& z, const DataTrajectory& d);

/// L = sum_i l_i + l_N - lambda^T c, i.e. -lambda_{-1}^T (T x_0 - d_{-1})
///     + sum_i lambda_i^T (f_i(z_i; d_i) - x_{i+1}).
double evaluate_lagrangian(const DOProblem& p, const PrimalDualTrajectory& w, const DataTrajectory& d);

}  // namespace edslab
