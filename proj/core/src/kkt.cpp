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

#include "edslab/kkt.hpp"

#include <lapacke.h>

#include <cmath>
#include <limits>
#include <string>

#include "edslab/diff.hpp"

namespace edslab {

StageBlocks linearize(const DOProblem& p, const PrimalDualTrajectory& w, const DataTrajectory& d) {
  p.check(w);
  p.check(d);
  const auto& dims = p.dims();
  const int nx = dims.nx;
  const int nu = dims.nu;
  const auto N = static_cast<std::size_t>(dims.N);

  StageBlocks b;
  b.dims = dims;
  b.T = p.T();
  b.Q.resize(N + 1);
  b.E.resize(N + 1);
  for (auto* v : {&b.R, &b.S, &b.F, &b.A, &b.B, &b.G}) v->resize(N);

  for (std::size_t i = 0; i < N; ++i) {
    const int stage = static_cast<int>(i);
    const int nd = dims.data_dim(stage);
    const auto& s = p.stage(stage);
    const Matrix h = diff::stage_lagrangian_hessian(s, w.x[i], w.u[i], d.at(stage), w.lam(stage));
    b.Q[i] = h.block(0, 0, nx, nx);
    b.S[i] = h.block(0, nx, nx, nu);
    b.R[i] = h.block(nx, nx, nu, nu);
    b.E[i] = h.block(0, nx + nu, nx, nd);
    b.F[i] = h.block(nx, nx + nu, nu, nd);
    const Matrix jf = diff::stage_dynamics_jacobian(s, w.x[i], w.u[i], d.at(stage));
    if (jf.rows() != nx || jf.cols() != nx + nu + nd) {
      throw ConfigurationError("dynamics Jacobian has wrong shape at stage " + std::to_string(stage));
    }
    b.A[i] = jf.leftCols(nx);
    b.B[i] = jf.middleCols(nx, nu);
    b.G[i] = jf.rightCols(nd);
  }
  const Matrix ht = diff::terminal_cost_hessian(p.terminal(), w.x.back(), d.at(dims.N));
  b.Q[N] = ht.topLeftCorner(nx, nx);
  b.E[N] = ht.topRightCorner(nx, dims.data_dim(dims.N));
  return b;
}

Matrix assemble_jacobian(const StageBlocks& blocks) {
  const auto& dims = blocks.dims;
  Matrix J = Matrix::Zero(dims.dual_size(), dims.primal_size());
  if (dims.n0 > 0) J.block(0, dims.x_offset(0), dims.n0, dims.nx) = blocks.T;
  for (int i = 0; i < dims.N; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const int row = dims.constraint_offset(i);
    J.block(row, dims.x_offset(i), dims.nx, dims.nx) = -blocks.A[s];
    J.block(row, dims.u_offset(i), dims.nx, dims.nu) = -blocks.B[s];
    J.block(row, dims.x_offset(i + 1), dims.nx, dims.nx).setIdentity();
  }
  return J;
}

Matrix assemble_hessian(const StageBlocks& blocks) {
  const auto& dims = blocks.dims;
  Matrix H = Matrix::Zero(dims.primal_size(), dims.primal_size());
  for (int i = 0; i < dims.N; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const int xo = dims.x_offset(i);
    const int uo = dims.u_offset(i);
    H.block(xo, xo, dims.nx, dims.nx) = blocks.Q[s];
    H.block(uo, uo, dims.nu, dims.nu) = blocks.R[s];
    H.block(xo, uo, dims.nx, dims.nu) = blocks.S[s];
    H.block(uo, xo, dims.nu, dims.nx) = blocks.S[s].transpose();
  }
  const int xN = dims.x_offset(dims.N);
  H.block(xN, xN, dims.nx, dims.nx) = blocks.Q[static_cast<std::size_t>(dims.N)];
  return H;
}

Vector kkt_residual(const DOProblem& p, const PrimalDualTrajectory& w, const DataTrajectory& d) {
  const auto& dims = p.dims();
  const Vector c = evaluate_constraints(p, w, d);  // also checks dimensions
  const int nx = dims.nx;
  const int nu = dims.nu;

  Vector g = Vector::Zero(dims.primal_size());
  for (int i = 0; i < dims.N; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const auto& fn = p.stage(i);
    const Vector gl = diff::stage_cost_gradient(fn, w.x[s], w.u[s], d.at(i));
    const Matrix jf = diff::stage_dynamics_jacobian(fn, w.x[s], w.u[s], d.at(i));
    const Vector& li = w.lam(i);
    g.segment(dims.x_offset(i), nx) += gl.head(nx) + jf.leftCols(nx).transpose() * li;
    g.segment(dims.u_offset(i), nu) += gl.segment(nx, nu) + jf.middleCols(nx, nu).transpose() * li;
    g.segment(dims.x_offset(i + 1), nx) -= li;
  }
  if (dims.n0 > 0) g.segment(dims.x_offset(0), nx) -= p.T().transpose() * w.lam(-1);
  g.segment(dims.x_offset(dims.N), nx) += diff::terminal_cost_gradient(p.terminal(), w.x.back(), d.at(dims.N)).head(nx);

  Vector r(g.size() + c.size());
  r << g, c;
  return r;
}

KKTSystem assemble_kkt_system(const DOProblem& p, const PrimalDualTrajectory& w, const DataTrajectory& d) {
  const StageBlocks blocks = linearize(p, w, d);
  return {assemble_hessian(blocks), assemble_jacobian(blocks), kkt_residual(p, w, d)};
}

SymmetricIndefiniteFactorization::SymmetricIndefiniteFactorization(const Matrix& K) : lu_(K) {
  const auto n = static_cast<lapack_int>(K.rows());
  if (K.rows() != K.cols()) throw ConfigurationError("factorization needs a square matrix");
  pivots_.assign(static_cast<std::size_t>(n), 0);
  if (n == 0) return;
  std::vector<lapack_int> ipiv(static_cast<std::size_t>(n));
  // A one-element workspace selects the unblocked Bunch-Kaufman sweep. It skips
  // zero multipliers, so banded KKT matrices factor quickly, and it avoids the
  // panel updates that some optimized BLAS builds get wrong on large matrices.
  double work = 0.0;
  const lapack_int info = LAPACKE_dsytrf_work(LAPACK_COL_MAJOR, 'L', n, lu_.data(), n, ipiv.data(), &work, 1);
  if (info < 0) throw Error("dsytrf rejected argument " + std::to_string(-info));
  for (std::size_t k = 0; k < ipiv.size(); ++k) pivots_[k] = static_cast<int>(ipiv[k]);

  // Pivots below this are treated as numerically zero.
  const double scale = std::max(K.cwiseAbs().maxCoeff(), 1.0);
  const double tiny = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;
  for (lapack_int k = 0; k < n;) {
    if (ipiv[static_cast<std::size_t>(k)] > 0) {
      const double dk = lu_(k, k);
      if (std::abs(dk) <= tiny) {
        ++inertia_.zero;
      } else if (dk > 0) {
        ++inertia_.positive;
      } else {
        ++inertia_.negative;
      }
      k += 1;
    } else {
      const double a = lu_(k, k);
      const double b = lu_(k + 1, k);
      const double c = lu_(k + 1, k + 1);
      const double det = a * c - b * b;
      if (std::abs(det) <= tiny * tiny) {
        ++inertia_.zero;
        (a + c > 0 ? inertia_.positive : inertia_.negative) += 1;
      } else if (det < 0) {
        ++inertia_.positive;
        ++inertia_.negative;
      } else {
        (a + c > 0 ? inertia_.positive : inertia_.negative) += 2;
      }
      k += 2;
    }
  }
  singular_ = info > 0 || inertia_.zero > 0;
}

Vector SymmetricIndefiniteFactorization::solve(const Vector& rhs) const {
  if (singular_) throw RegularityError("solve with a singular factorization");
  const auto n = static_cast<lapack_int>(lu_.rows());
  Vector x = rhs;
  if (n == 0) return x;
  std::vector<lapack_int> ipiv(pivots_.begin(), pivots_.end());
  const lapack_int info = LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n, 1, lu_.data(), n, ipiv.data(), x.data(), n);
  if (info != 0) throw Error("dsytrs failed with info " + std::to_string(info));
  return x;
}

void SolveOptions::validate() const {
  if (!(tol_kkt > 0.0)) throw ConfigurationError("tol_kkt must be positive");
  if (max_iter < 1) throw ConfigurationError("max_iter must be >= 1");
  if (!(reg0 > 0.0) || reg_max < reg0) throw ConfigurationError("invalid regularization range");
  if (!(ls_beta > 0.0 && ls_beta < 1.0) || !(ls_sigma > 0.0 && ls_sigma < 0.5)) {
    throw ConfigurationError("invalid line-search parameters");
  }
}

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

PrimalDualTrajectory step(const Dimensions& dims, const PrimalDualTrajectory& w, const Vector& dz,
                          const Vector& dl, double alpha) {
  PrimalDualTrajectory out;
  out.set_primal(dims, w.primal() + alpha * dz);
  out.set_dual(dims, w.dual() + alpha * dl);
  return out;
}

}  // namespace

SolveResult solve_equality_nlp(const DOProblem& p, const DataTrajectory& d, const PrimalDualTrajectory& w0,
                               const SolveOptions& opts) {
  opts.validate();
  p.check(d);
  p.check(w0);
  const auto& dims = p.dims();
  const int nz = dims.primal_size();
  const int nc = dims.dual_size();

  SolveResult result;
  result.w = w0;
  Vector r = kkt_residual(p, result.w, d);
  if (!all_finite(r)) throw EvaluationError("non-finite KKT residual at the initial point", 0);

  for (int iter = 0;; ++iter) {
    result.residual = r.lpNorm<Eigen::Infinity>();
    result.iterations = iter;
    if (result.residual <= opts.tol_kkt) return result;
    if (iter >= opts.max_iter) break;

    const StageBlocks blocks = linearize(p, result.w, d);
    Matrix K = Matrix::Zero(nz + nc, nz + nc);
    K.topLeftCorner(nz, nz) = assemble_hessian(blocks);
    const Matrix J = assemble_jacobian(blocks);
    K.bottomLeftCorner(nc, nz) = J;
    K.topRightCorner(nz, nc) = J.transpose();

    double shift = 0.0;
    for (;;) {
      Matrix Kr = K;
      if (shift > 0.0) Kr.topLeftCorner(nz, nz).diagonal().array() += shift;
      SymmetricIndefiniteFactorization fact(Kr);
      const auto& in = fact.inertia();
      if (!fact.singular() && in.positive == nz && in.negative == nc) {
        result.regularization = std::max(result.regularization, shift);
        Vector sol = fact.solve(-r);
        // One step of iterative refinement guards against a poor factorization.
        Vector lin = Kr * sol + r;
        if (lin.norm() > 1e-10 * r.norm()) {
          sol -= fact.solve(lin);
          lin = Kr * sol + r;
        }
        if (!all_finite(sol) || lin.norm() > 1e-6 * r.norm()) {
          shift = shift == 0.0 ? opts.reg0 : shift * 10.0;
          if (shift > opts.reg_max * (1.0 + 1e-9)) {
            throw RegularityError("KKT solve inaccurate after maximal regularization");
          }
          continue;
        }
        const Vector dz = sol.head(nz);
        const Vector dl = -sol.tail(nc);

        const double phi0 = 0.5 * r.squaredNorm();
        double alpha = 1.0;
        PrimalDualTrajectory trial;
        Vector rt;
        bool accepted = false;
        while (alpha > 1e-12) {
          trial = step(dims, result.w, dz, dl, alpha);
          try {
            rt = kkt_residual(p, trial, d);
          } catch (const EvaluationError&) {
            alpha *= opts.ls_beta;
            continue;
          }
          if (all_finite(rt) && 0.5 * rt.squaredNorm() <= (1.0 - 2.0 * opts.ls_sigma * alpha) * phi0) {
            accepted = true;
            break;
          }
          alpha *= opts.ls_beta;
        }
        if (!accepted) {
          // Residual is stuck at its noise level or the direction is poor; take the
          // full step and let max_iter decide.
          trial = step(dims, result.w, dz, dl, 1.0);
          rt = kkt_residual(p, trial, d);
          if (!all_finite(rt)) {
            throw NonconvergenceError("line search failed", result.w, result.residual);
          }
        }
        result.w = std::move(trial);
        r = std::move(rt);
        break;
      }
      shift = shift == 0.0 ? opts.reg0 : shift * 10.0;
      if (shift > opts.reg_max * (1.0 + 1e-9)) {
        throw RegularityError("KKT matrix singular or of wrong inertia after maximal regularization");
      }
    }
  }
  throw NonconvergenceError("Newton iteration limit reached (residual " + std::to_string(result.residual) + ")",
                            result.w, result.residual);
}

}  // namespace edslab
