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

#include "edslab/diff.hpp"

#include <cmath>
#include <string>

#include "edslab/errors.hpp"

namespace edslab::diff {

namespace {

void require_finite(const Vector& v, const char* what, int coordinate) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (!std::isfinite(v[k])) {
      throw EvaluationError(std::string("non-finite ") + what + " output component " + std::to_string(k) +
                                " while perturbing coordinate",
                            coordinate);
    }
  }
}

double require_finite(double v, const char* what, int coordinate) {
  if (!std::isfinite(v)) throw EvaluationError(std::string("non-finite ") + what + " value", coordinate);
  return v;
}

bool same_slice(Slice a, Slice b) { return a.start == b.start && a.size == b.size; }

void symmetrize_if_diagonal(Matrix& m, Slice a, Slice b) {
  if (same_slice(a, b)) m = (0.5 * (m + m.transpose())).eval();
}

void check_slice(Slice s, Eigen::Index n) {
  if (s.start < 0 || s.size < 0 || s.start + s.size > n) throw ConfigurationError("slice out of range");
}

}  // namespace

void FDConfig::validate() const {
  if (!(rel_step > 0.0) || !(abs_floor > 0.0)) {
    throw ConfigurationError("finite-difference steps must be positive");
  }
}

double step_size(double xk, const FDConfig& cfg) {
  return cfg.rel_step * std::max(std::abs(xk), 1.0) + cfg.abs_floor;
}

Matrix jacobian(const VectorMap& map, const Vector& at, const FDConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = at.size();
  const Vector f0 = map(at);
  require_finite(f0, "map", -1);
  Matrix jac(f0.size(), n);
  Vector y = at;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = step_size(at[k], cfg);
    y[k] = at[k] + h;
    const Vector fp = map(y);
    y[k] = at[k] - h;
    const Vector fm = map(y);
    y[k] = at[k];
    require_finite(fp, "map", static_cast<int>(k));
    require_finite(fm, "map", static_cast<int>(k));
    jac.col(k) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

Vector gradient(const ScalarMap& f, const Vector& at, const FDConfig& cfg) {
  cfg.validate();
  Vector g(at.size());
  Vector y = at;
  for (Eigen::Index k = 0; k < at.size(); ++k) {
    const double h = step_size(at[k], cfg);
    y[k] = at[k] + h;
    const double fp = require_finite(f(y), "scalar map", static_cast<int>(k));
    y[k] = at[k] - h;
    const double fm = require_finite(f(y), "scalar map", static_cast<int>(k));
    y[k] = at[k];
    g[k] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Matrix hessian_block(const ScalarMap& f, Slice a, Slice b, const Vector& at, const FDConfig& cfg) {
  cfg.validate();
  check_slice(a, at.size());
  check_slice(b, at.size());
  Matrix out(a.size, b.size);
  Vector y = at;
  const double f0 = require_finite(f(at), "scalar map", -1);
  for (int p = 0; p < a.size; ++p) {
    const int ip = a.start + p;
    const double hp = step_size(at[ip], cfg);
    for (int q = 0; q < b.size; ++q) {
      const int iq = b.start + q;
      if (ip == iq) {
        y[ip] = at[ip] + hp;
        const double fp = require_finite(f(y), "scalar map", ip);
        y[ip] = at[ip] - hp;
        const double fm = require_finite(f(y), "scalar map", ip);
        y[ip] = at[ip];
        out(p, q) = (fp - 2.0 * f0 + fm) / (hp * hp);
        continue;
      }
      const double hq = step_size(at[iq], cfg);
      auto eval = [&](double sp, double sq) {
        y[ip] = at[ip] + sp * hp;
        y[iq] = at[iq] + sq * hq;
        const double v = require_finite(f(y), "scalar map", ip);
        y[ip] = at[ip];
        y[iq] = at[iq];
        return v;
      };
      out(p, q) = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * hp * hq);
    }
  }
  symmetrize_if_diagonal(out, a, b);
  return out;
}

Matrix hessian_block_from_gradient(const VectorMap& grad, Slice a, Slice b, const Vector& at,
                                   const FDConfig& cfg) {
  cfg.validate();
  check_slice(a, at.size());
  check_slice(b, at.size());
  Matrix out(a.size, b.size);
  Vector y = at;
  for (int q = 0; q < b.size; ++q) {
    const int iq = b.start + q;
    const double h = step_size(at[iq], cfg);
    y[iq] = at[iq] + h;
    const Vector gp = grad(y);
    y[iq] = at[iq] - h;
    const Vector gm = grad(y);
    y[iq] = at[iq];
    require_finite(gp, "gradient", iq);
    require_finite(gm, "gradient", iq);
    out.col(q) = (gp.segment(a.start, a.size) - gm.segment(a.start, a.size)) / (2.0 * h);
  }
  symmetrize_if_diagonal(out, a, b);
  return out;
}

ScalarMap stacked_cost(const StageFunctions& s, int nx, int nu) {
  return [&s, nx, nu](const Vector& y) {
    return s.cost(y.head(nx), y.segment(nx, nu), y.tail(y.size() - nx - nu));
  };
}

VectorMap stacked_dynamics(const StageFunctions& s, int nx, int nu) {
  return [&s, nx, nu](const Vector& y) -> Vector {
    return s.dynamics(y.head(nx), y.segment(nx, nu), y.tail(y.size() - nx - nu));
  };
}

namespace {

Vector stack(const Vector& x, const Vector& u, const Vector& d) {
  Vector y(x.size() + u.size() + d.size());
  y << x, u, d;
  return y;
}

}  // namespace

Vector stage_cost_gradient(const StageFunctions& s, const Vector& x, const Vector& u, const Vector& d) {
  if (s.cost_gradient) return s.cost_gradient(x, u, d);
  const int nx = static_cast<int>(x.size());
  const int nu = static_cast<int>(u.size());
  return gradient(stacked_cost(s, nx, nu), stack(x, u, d));
}

Matrix stage_dynamics_jacobian(const StageFunctions& s, const Vector& x, const Vector& u, const Vector& d) {
  if (s.dynamics_jacobian) return s.dynamics_jacobian(x, u, d);
  const int nx = static_cast<int>(x.size());
  const int nu = static_cast<int>(u.size());
  return jacobian(stacked_dynamics(s, nx, nu), stack(x, u, d));
}

Matrix stage_lagrangian_hessian(const StageFunctions& s, const Vector& x, const Vector& u, const Vector& d,
                                const Vector& lambda) {
  const int nx = static_cast<int>(x.size());
  const int nu = static_cast<int>(u.size());
  const Vector y = stack(x, u, d);
  const Slice all{0, static_cast<int>(y.size())};

  Matrix h;
  if (s.cost_hessian) {
    h = s.cost_hessian(x, u, d);
  } else if (s.cost_gradient) {
    h = hessian_block_from_gradient(
        [&](const Vector& v) -> Vector { return s.cost_gradient(v.head(nx), v.segment(nx, nu), v.tail(v.size() - nx - nu)); },
        all, all, y);
  } else {
    h = hessian_block(stacked_cost(s, nx, nu), all, all, y);
  }

  if (lambda.size() == 0 || lambda.isZero(0.0)) return h;

  if (s.dynamics_curvature) {
    h += s.dynamics_curvature(x, u, d, lambda);
  } else if (s.dynamics_jacobian) {
    h += hessian_block_from_gradient(
        [&](const Vector& v) -> Vector {
          return s.dynamics_jacobian(v.head(nx), v.segment(nx, nu), v.tail(v.size() - nx - nu)).transpose() * lambda;
        },
        all, all, y);
  } else {
    const auto f = stacked_dynamics(s, nx, nu);
    h += hessian_block([&](const Vector& v) { return lambda.dot(f(v)); }, all, all, y);
  }
  return h;
}

Vector terminal_cost_gradient(const TerminalFunctions& t, const Vector& x, const Vector& d) {
  if (t.cost_gradient) return t.cost_gradient(x, d);
  Vector y(x.size() + d.size());
  y << x, d;
  const auto nx = x.size();
  return gradient([&](const Vector& v) { return t.cost(v.head(nx), v.tail(v.size() - nx)); }, y);
}

Matrix terminal_cost_hessian(const TerminalFunctions& t, const Vector& x, const Vector& d) {
  if (t.cost_hessian) return t.cost_hessian(x, d);
  Vector y(x.size() + d.size());
  y << x, d;
  const auto nx = x.size();
  const Slice all{0, static_cast<int>(y.size())};
  if (t.cost_gradient) {
    return hessian_block_from_gradient(
        [&](const Vector& v) -> Vector { return t.cost_gradient(v.head(nx), v.tail(v.size() - nx)); }, all, all, y);
  }
  return hessian_block([&](const Vector& v) { return t.cost(v.head(nx), v.tail(v.size() - nx)); }, all, all, y);
}

}  // namespace edslab::diff
