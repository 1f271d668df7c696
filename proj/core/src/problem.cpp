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

#include "edslab/problem.hpp"

#include <cmath>
#include <string>

#include "edslab/errors.hpp"

namespace edslab {

namespace {

void expect_size(const Vector& v, int n, const char* what, int stage) {
  if (v.size() != n) {
    throw ConfigurationError(std::string(what) + " at stage " + std::to_string(stage) + " has size " +
                             std::to_string(v.size()) + ", expected " + std::to_string(n));
  }
}

}  // namespace

Dimensions Dimensions::uniform(int N, int nx, int nu, int n0, int nd) {
  Dimensions dims;
  dims.N = N;
  dims.nx = nx;
  dims.nu = nu;
  dims.n0 = n0;
  dims.nd.assign(static_cast<std::size_t>(N + 2), nd);
  if (!dims.nd.empty()) dims.nd.front() = n0;
  return dims;
}

void Dimensions::validate() const {
  if (N < 1) throw ConfigurationError("horizon N must be >= 1");
  if (nx < 1) throw ConfigurationError("n_x must be >= 1");
  if (nu < 0) throw ConfigurationError("n_u must be >= 0");
  if (n0 < 0 || n0 > nx) throw ConfigurationError("n_0 must lie in [0, n_x]");
  if (static_cast<int>(nd.size()) != N + 2) throw ConfigurationError("nd must have N + 2 entries");
  if (nd.front() != n0) throw ConfigurationError("data size at stage -1 must equal n_0");
  for (int v : nd) {
    if (v < 0) throw ConfigurationError("negative data size");
  }
}

DataTrajectory DataTrajectory::zeros(const Dimensions& dims) {
  DataTrajectory d;
  d.d.reserve(dims.nd.size());
  for (int n : dims.nd) d.d.push_back(Vector::Zero(n));
  return d;
}

PrimalDualTrajectory PrimalDualTrajectory::zeros(const Dimensions& dims) {
  PrimalDualTrajectory w;
  w.x.assign(static_cast<std::size_t>(dims.N + 1), Vector::Zero(dims.nx));
  w.u.assign(static_cast<std::size_t>(dims.N), Vector::Zero(dims.nu));
  w.lambda.assign(static_cast<std::size_t>(dims.N + 1), Vector::Zero(dims.nx));
  w.lambda.front() = Vector::Zero(dims.n0);
  return w;
}

Vector PrimalDualTrajectory::stage_block(int i) const {
  const int N = static_cast<int>(u.size());
  if (i == -1) return lam(-1);
  if (i == N) return x.back();
  const auto& xi = x.at(static_cast<std::size_t>(i));
  const auto& ui = u.at(static_cast<std::size_t>(i));
  const auto& li = lam(i);
  Vector out(xi.size() + ui.size() + li.size());
  out << xi, ui, li;
  return out;
}

Vector PrimalDualTrajectory::primal() const {
  Eigen::Index n = 0;
  for (const auto& v : x) n += v.size();
  for (const auto& v : u) n += v.size();
  Vector z(n);
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    z.segment(k, x[i].size()) = x[i];
    k += x[i].size();
    if (i < u.size()) {
      z.segment(k, u[i].size()) = u[i];
      k += u[i].size();
    }
  }
  return z;
}

Vector PrimalDualTrajectory::dual() const {
  Eigen::Index n = 0;
  for (const auto& v : lambda) n += v.size();
  Vector out(n);
  Eigen::Index k = 0;
  for (const auto& v : lambda) {
    out.segment(k, v.size()) = v;
    k += v.size();
  }
  return out;
}

void PrimalDualTrajectory::set_primal(const Dimensions& dims, const Eigen::Ref<const Vector>& z) {
  if (z.size() != dims.primal_size()) throw ConfigurationError("primal vector has wrong length");
  x.resize(static_cast<std::size_t>(dims.N + 1));
  u.resize(static_cast<std::size_t>(dims.N));
  for (int i = 0; i <= dims.N; ++i) {
    x[static_cast<std::size_t>(i)] = z.segment(dims.x_offset(i), dims.nx);
    if (i < dims.N) u[static_cast<std::size_t>(i)] = z.segment(dims.u_offset(i), dims.nu);
  }
}

void PrimalDualTrajectory::set_dual(const Dimensions& dims, const Eigen::Ref<const Vector>& l) {
  if (l.size() != dims.dual_size()) throw ConfigurationError("dual vector has wrong length");
  lambda.resize(static_cast<std::size_t>(dims.N + 1));
  lambda.front() = l.head(dims.n0);
  for (int i = 0; i < dims.N; ++i) {
    lambda[static_cast<std::size_t>(i + 1)] = l.segment(dims.constraint_offset(i), dims.nx);
  }
}

DOProblem::DOProblem(Dimensions dims, StageOracles oracles, Matrix T)
    : dims_(std::move(dims)), oracles_(std::move(oracles)), T_(std::move(T)) {
  dims_.validate();
  if (static_cast<int>(oracles_.stages.size()) != dims_.N) {
    throw ConfigurationError("expected " + std::to_string(dims_.N) + " stage oracles");
  }
  for (std::size_t i = 0; i < oracles_.stages.size(); ++i) {
    if (!oracles_.stages[i].cost || !oracles_.stages[i].dynamics) {
      throw ConfigurationError("stage " + std::to_string(i) + " is missing its cost or dynamics");
    }
  }
  if (!oracles_.terminal.cost) throw ConfigurationError("terminal cost is missing");
  if (T_.rows() != dims_.n0 || T_.cols() != dims_.nx) {
    throw ConfigurationError("T must be n_0 x n_x");
  }
  if (dims_.n0 > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(T_);
    if (qr.rank() < dims_.n0) throw ConfigurationError("T must have full row rank");
  }
}

void DOProblem::check(const DataTrajectory& d) const {
  if (static_cast<int>(d.d.size()) != dims_.N + 2) throw ConfigurationError("data trajectory has wrong length");
  for (int i = -1; i <= dims_.N; ++i) expect_size(d.at(i), dims_.data_dim(i), "data", i);
}

void DOProblem::check(const PrimalDualTrajectory& w) const {
  if (static_cast<int>(w.x.size()) != dims_.N + 1 || static_cast<int>(w.u.size()) != dims_.N ||
      static_cast<int>(w.lambda.size()) != dims_.N + 1) {
    throw ConfigurationError("primal-dual trajectory has wrong number of stages");
  }
  for (int i = 0; i <= dims_.N; ++i) expect_size(w.x[static_cast<std::size_t>(i)], dims_.nx, "state", i);
  for (int i = 0; i < dims_.N; ++i) {
    expect_size(w.u[static_cast<std::size_t>(i)], dims_.nu, "control", i);
    expect_size(w.lam(i), dims_.nx, "multiplier", i);
  }
  expect_size(w.lam(-1), dims_.n0, "multiplier", -1);
}

double evaluate_objective(const DOProblem& p, const PrimalDualTrajectory& z, const DataTrajectory& d) {
  p.check(d);
  p.check(z);
  const int N = p.dims().N;
  double total = 0.0;
  for (int i = 0; i < N; ++i) {
    const double v = p.stage(i).cost(z.x[static_cast<std::size_t>(i)], z.u[static_cast<std::size_t>(i)], d.at(i));
    if (!std::isfinite(v)) throw EvaluationError("non-finite stage cost", i);
    total += v;
  }
  const double vN = p.terminal().cost(z.x.back(), d.at(N));
  if (!std::isfinite(vN)) throw EvaluationError("non-finite terminal cost", N);
  return total + vN;
}

Vector evaluate_constraints(const DOProblem& p, const PrimalDualTrajectory& z, const DataTrajectory& d) {
  p.check(d);
  p.check(z);
  const auto& dims = p.dims();
  Vector c(dims.dual_size());
  if (dims.n0 > 0) c.head(dims.n0) = p.T() * z.x.front() - d.at(-1);
  for (int i = 0; i < dims.N; ++i) {
    const auto s = static_cast<std::size_t>(i);
    Vector f = p.stage(i).dynamics(z.x[s], z.u[s], d.at(i));
    if (f.size() != dims.nx) throw ConfigurationError("dynamics returned wrong size at stage " + std::to_string(i));
    c.segment(dims.constraint_offset(i), dims.nx) = z.x[s + 1] - f;
  }
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    if (!std::isfinite(c[k])) throw EvaluationError("non-finite constraint residual", static_cast<int>(k));
  }
  return c;
}

double evaluate_lagrangian(const DOProblem& p, const PrimalDualTrajectory& w, const DataTrajectory& d) {
  const double objective = evaluate_objective(p, w, d);
  const Vector c = evaluate_constraints(p, w, d);
  return objective - w.dual().dot(c);
}

}  // namespace edslab
