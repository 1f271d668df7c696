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

#include "edslab/steady_state.hpp"

#include <Eigen/Dense>

#include "edslab/diff.hpp"
#include "edslab/errors.hpp"

namespace edslab {

Vector steady_state_residual(const StageFunctions& stage, const Vector& d, const Vector& x, const Vector& u,
                             const Vector& lambda) {
  const auto nx = x.size(), nu = u.size();
  const Vector g = diff::stage_cost_gradient(stage, x, u, d);
  const Matrix Jf = diff::stage_dynamics_jacobian(stage, x, u, d);
  Matrix AmI = Jf.leftCols(nx);
  AmI.diagonal().array() -= 1.0;

  Vector r(2 * nx + nu);
  r.head(nx) = g.head(nx) + AmI.transpose() * lambda;
  r.segment(nx, nu) = g.segment(nx, nu) + Jf.middleCols(nx, nu).transpose() * lambda;
  r.tail(nx) = stage.dynamics(x, u, d) - x;
  if (!r.allFinite()) throw EvaluationError("non-finite steady-state residual", 0);
  return r;
}

SteadyState solve_steady_state(const StageFunctions& stage, const Vector& d, const Vector& x0, const Vector& u0,
                               const SolveOptions& opts) {
  opts.validate();
  const auto nx = x0.size(), nu = u0.size();
  Vector v(2 * nx + nu);
  v << x0, u0, Vector::Zero(nx);

  auto unpack = [&](const Vector& z, auto&& fn) {
    return fn(Vector(z.head(nx)), Vector(z.segment(nx, nu)), Vector(z.tail(nx)));
  };
  auto residual = [&](const Vector& z) {
    return unpack(z, [&](const Vector& x, const Vector& u, const Vector& l) {
      return steady_state_residual(stage, d, x, u, l);
    });
  };

  Vector r = residual(v);
  for (int it = 0; it <= opts.max_iter; ++it) {
    const double norm = r.lpNorm<Eigen::Infinity>();
    if (norm <= opts.tol_kkt) {
      SteadyState ss;
      ss.x = v.head(nx);
      ss.u = v.segment(nx, nu);
      ss.lambda = v.tail(nx);
      ss.residual = norm;
      ss.iterations = it;
      return ss;
    }
    if (it == opts.max_iter) break;

    const Vector x = v.head(nx), u = v.segment(nx, nu), lam = v.tail(nx);
    const Matrix H = diff::stage_lagrangian_hessian(stage, x, u, d, lam);
    const Matrix Jf = diff::stage_dynamics_jacobian(stage, x, u, d);
    Matrix C = Jf.leftCols(nx + nu);
    C.leftCols(nx).diagonal().array() -= 1.0;

    Matrix K = Matrix::Zero(2 * nx + nu, 2 * nx + nu);
    K.topLeftCorner(nx + nu, nx + nu) = H.topLeftCorner(nx + nu, nx + nu);
    K.topRightCorner(nx + nu, nx) = C.transpose();
    K.bottomLeftCorner(nx, nx + nu) = C;
    Eigen::FullPivLU<Matrix> lu(K);
    if (!lu.isInvertible()) throw RegularityError("singular steady-state KKT matrix");
    const Vector step = lu.solve(-r);

    const double phi0 = 0.5 * r.squaredNorm();
    double alpha = 1.0;
    Vector trial = v + step;
    Vector r_trial;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      trial = v + alpha * step;
      try {
        r_trial = residual(trial);
        if (0.5 * r_trial.squaredNorm() <= (1.0 - 2.0 * opts.ls_sigma * alpha) * phi0) {
          accepted = true;
          break;
        }
      } catch (const EvaluationError&) {
      }
      alpha *= opts.ls_beta;
    }
    if (!accepted) {
      trial = v + step;
      r_trial = residual(trial);
    }
    v = trial;
    r = r_trial;
  }
  throw NonconvergenceError("steady-state Newton did not converge", PrimalDualTrajectory{}, r.lpNorm<Eigen::Infinity>());
}

TimeInvariantCosts build_ti_costs(const SteadyState& ss, const Matrix& Q, const Matrix& T) {
  const auto nx = ss.x.size();
  if (Q.rows() != nx || Q.cols() != nx) throw ConfigurationError("Q must be n_x x n_x");
  if (T.cols() != nx) throw ConfigurationError("T must have n_x columns");
  if (ss.lambda.size() != nx) throw ConfigurationError("steady-state multiplier has wrong size");

  TimeInvariantCosts out;
  const Matrix Tpinv = T.completeOrthogonalDecomposition().pseudoInverse();
  const Matrix P = Matrix::Identity(nx, nx) - Tpinv * T;
  out.lambda_b = -(P * ss.lambda);

  const Vector target = out.lambda_b + ss.lambda;
  if (T.rows() > 0) {
    out.lambda_minus1 = T.transpose().completeOrthogonalDecomposition().solve(target);
  } else {
    out.lambda_minus1 = Vector::Zero(0);
  }
  const double gap = (T.transpose() * out.lambda_minus1 - target).norm();
  if (gap > 1e-8 * std::max(1.0, target.norm())) {
    throw RegularityError("lambda_b + lambda^s is not in the range of T^T");
  }

  const Vector lb = out.lambda_b;
  out.initial.cost = [lb](const Vector& x, const Vector&) { return lb.dot(x); };
  out.initial.cost_gradient = [lb](const Vector&, const Vector& d) {
    Vector g = Vector::Zero(lb.size() + d.size());
    g.head(lb.size()) = lb;
    return g;
  };
  out.initial.cost_hessian = [nx](const Vector&, const Vector& d) {
    return Matrix::Zero(nx + d.size(), nx + d.size()).eval();
  };

  const Vector xs = ss.x, ls = ss.lambda;
  const Matrix Qs = 0.5 * (Q + Q.transpose());
  out.terminal.cost = [xs, ls, Qs](const Vector& x, const Vector&) { return (x - xs).dot(Qs * (x - xs)) + ls.dot(x); };
  out.terminal.cost_gradient = [xs, ls, Qs](const Vector& x, const Vector& d) {
    Vector g = Vector::Zero(x.size() + d.size());
    g.head(x.size()) = 2.0 * Qs * (x - xs) + ls;
    return g;
  };
  out.terminal.cost_hessian = [Qs, nx](const Vector&, const Vector& d) {
    Matrix h = Matrix::Zero(nx + d.size(), nx + d.size());
    h.topLeftCorner(nx, nx) = 2.0 * Qs;
    return h;
  };
  return out;
}

DOProblem make_time_invariant_problem(const StageFunctions& stage, const TimeInvariantCosts& costs, const Matrix& T,
                                      int N, int nu, int nd) {
  const int nx = static_cast<int>(T.cols());
  std::vector<StageFunctions> stages(static_cast<std::size_t>(N), stage);

  StageFunctions first = stage;
  const TerminalFunctions lb = costs.initial;
  first.cost = [stage, lb](const Vector& x, const Vector& u, const Vector& d) {
    return stage.cost(x, u, d) + lb.cost(x, d);
  };
  const Vector slope = costs.lambda_b;
  if (stage.cost_gradient) {
    first.cost_gradient = [stage, slope](const Vector& x, const Vector& u, const Vector& d) {
      Vector g = stage.cost_gradient(x, u, d);
      g.head(slope.size()) += slope;
      return g;
    };
  }
  if (!stages.empty()) stages.front() = std::move(first);

  StageOracles oracles{std::move(stages), costs.terminal};
  return DOProblem(Dimensions::uniform(N, nx, nu, static_cast<int>(T.rows()), nd), std::move(oracles), T);
}

DataTrajectory steady_state_data(const SteadyState& ss, const Matrix& T, const Vector& d_s, int N) {
  DataTrajectory data;
  data.d.reserve(static_cast<std::size_t>(N + 2));
  data.d.push_back(T * ss.x);
  for (int i = 0; i <= N; ++i) data.d.push_back(d_s);
  return data;
}

PrimalDualTrajectory steady_state_trajectory(const SteadyState& ss, const Dimensions& dims) {
  PrimalDualTrajectory w = PrimalDualTrajectory::zeros(dims);
  for (auto& x : w.x) x = ss.x;
  for (auto& u : w.u) u = ss.u;
  w.lam(-1) = ss.lambda_minus1;
  for (int i = 0; i < dims.N; ++i) w.lam(i) = ss.lambda;
  return w;
}

}  // namespace edslab
