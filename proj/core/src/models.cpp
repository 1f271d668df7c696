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

#include "edslab/models.hpp"

#include <cmath>
#include <random>

#include "edslab/errors.hpp"

namespace edslab {

void QuadrotorParams::validate() const {
  if (!(dt > 0.0)) throw ConfigurationError("quadrotor dt must be positive");
  if (N < 2) throw ConfigurationError("quadrotor horizon must be >= 2");
  if (!(q >= 0.0) || !(b >= 0.0)) throw ConfigurationError("quadrotor q and b must be nonnegative");
}

namespace {

enum State { kX, kXd, kY, kYd, kZ, kZd, kRoll, kPitch, kYaw };
enum Control { kThrust, kWx, kWy, kWz };

void check_pitch(double cb) {
  if (std::abs(cb) < 1e-9) throw EvaluationError("quadrotor pitch reached the cos(beta) = 0 singularity", kPitch);
}

}  // namespace

Vector quadrotor_continuous_rhs(const Vector& x, const Vector& u, const QuadrotorParams& prm) {
  const double cg = std::cos(x[kRoll]), sg = std::sin(x[kRoll]);
  const double cb = std::cos(x[kPitch]), sb = std::sin(x[kPitch]);
  const double ca = std::cos(x[kYaw]), sa = std::sin(x[kYaw]);
  check_pitch(cb);
  const double tb = sb / cb;
  const double a = u[kThrust];
  const double wx = prm.b * u[kWx];
  const double wy = u[kWy];

  Vector dx(kQuadrotorStates);
  dx[kX] = x[kXd];
  dx[kXd] = a * (cg * sb * ca + sg * sa);
  dx[kY] = x[kYd];
  dx[kYd] = a * (cg * sb * sa - sg * ca);
  dx[kZ] = x[kZd];
  dx[kZd] = a * cg * cb - prm.g;
  dx[kRoll] = (wx * cg + wy * sg) / cb;
  dx[kPitch] = -wx * sg + wy * cg;
  dx[kYaw] = (wx * cg + wy * sg) * tb + u[kWz];
  return dx;
}

Matrix quadrotor_rhs_jacobian(const Vector& x, const Vector& u, const QuadrotorParams& prm) {
  const double cg = std::cos(x[kRoll]), sg = std::sin(x[kRoll]);
  const double cb = std::cos(x[kPitch]), sb = std::sin(x[kPitch]);
  const double ca = std::cos(x[kYaw]), sa = std::sin(x[kYaw]);
  check_pitch(cb);
  const double tb = sb / cb;
  const double a = u[kThrust];
  const double wx = prm.b * u[kWx];
  const double wy = u[kWy];
  const int U = kQuadrotorStates;  // control columns start here

  Matrix J = Matrix::Zero(kQuadrotorStates, kQuadrotorStates + kQuadrotorControls);
  J(kX, kXd) = 1.0;
  J(kY, kYd) = 1.0;
  J(kZ, kZd) = 1.0;

  J(kXd, kRoll) = a * (-sg * sb * ca + cg * sa);
  J(kXd, kPitch) = a * cg * cb * ca;
  J(kXd, kYaw) = a * (-cg * sb * sa + sg * ca);
  J(kXd, U + kThrust) = cg * sb * ca + sg * sa;

  J(kYd, kRoll) = a * (-sg * sb * sa - cg * ca);
  J(kYd, kPitch) = a * cg * cb * sa;
  J(kYd, kYaw) = a * (cg * sb * ca + sg * sa);
  J(kYd, U + kThrust) = cg * sb * sa - sg * ca;

  J(kZd, kRoll) = -a * sg * cb;
  J(kZd, kPitch) = -a * cg * sb;
  J(kZd, U + kThrust) = cg * cb;

  const double turn = wx * cg + wy * sg;      // numerator shared by roll and yaw rates
  const double turn_dg = -wx * sg + wy * cg;  // its derivative in gamma
  J(kRoll, kRoll) = turn_dg / cb;
  J(kRoll, kPitch) = turn * sb / (cb * cb);
  J(kRoll, U + kWx) = prm.b * cg / cb;
  J(kRoll, U + kWy) = sg / cb;

  J(kPitch, kRoll) = -wx * cg - wy * sg;
  J(kPitch, U + kWx) = -prm.b * sg;
  J(kPitch, U + kWy) = cg;

  J(kYaw, kRoll) = turn_dg * tb;
  J(kYaw, kPitch) = turn / (cb * cb);
  J(kYaw, U + kWx) = prm.b * cg * tb;
  J(kYaw, U + kWy) = sg * tb;
  J(kYaw, U + kWz) = 1.0;
  return J;
}

Vector quadrotor_rk4_step(const Vector& x, const Vector& u, const QuadrotorParams& prm) {
  const double h = prm.dt;
  const Vector k1 = quadrotor_continuous_rhs(x, u, prm);
  const Vector k2 = quadrotor_continuous_rhs(x + 0.5 * h * k1, u, prm);
  const Vector k3 = quadrotor_continuous_rhs(x + 0.5 * h * k2, u, prm);
  const Vector k4 = quadrotor_continuous_rhs(x + h * k3, u, prm);
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Matrix quadrotor_rk4_jacobian(const Vector& x, const Vector& u, const QuadrotorParams& prm) {
  constexpr int nx = kQuadrotorStates;
  constexpr int nz = kQuadrotorStates + kQuadrotorControls;
  const double h = prm.dt;

  // Derivative of a stage point (x_k, u) with respect to (x, u).
  Matrix base = Matrix::Zero(nz, nz);
  base.setIdentity();
  auto lift = [&](const Matrix& dx) {
    Matrix m = base;
    m.topRows(nx) = dx;
    return m;
  };
  const Matrix I = base.topRows(nx);

  const Vector k1 = quadrotor_continuous_rhs(x, u, prm);
  const Matrix K1 = quadrotor_rhs_jacobian(x, u, prm);
  const Vector x2 = x + 0.5 * h * k1;
  const Vector k2 = quadrotor_continuous_rhs(x2, u, prm);
  const Matrix K2 = quadrotor_rhs_jacobian(x2, u, prm) * lift(I + 0.5 * h * K1);
  const Vector x3 = x + 0.5 * h * k2;
  const Vector k3 = quadrotor_continuous_rhs(x3, u, prm);
  const Matrix K3 = quadrotor_rhs_jacobian(x3, u, prm) * lift(I + 0.5 * h * K2);
  const Vector x4 = x + h * k3;
  const Matrix K4 = quadrotor_rhs_jacobian(x4, u, prm) * lift(I + h * K3);
  return I + h / 6.0 * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
}

Vector quadrotor_hover_state(const QuadrotorParams& prm) {
  Vector x = Vector::Zero(kQuadrotorStates);
  x[kZ] = prm.altitude;
  return x;
}

Vector quadrotor_hover_control(const QuadrotorParams& prm) {
  Vector u = Vector::Zero(kQuadrotorControls);
  u[kThrust] = prm.g;
  return u;
}

Matrix quadrotor_state_weight(const QuadrotorParams& prm) {
  Vector diag(kQuadrotorStates);
  diag << 1, 1, 1, prm.q, prm.q, prm.q, 1, 1, 1;
  return diag.asDiagonal();
}

ModelInstance quadrotor_problem(const QuadrotorParams& params) {
  params.validate();
  const QuadrotorParams prm = params;
  constexpr int nx = kQuadrotorStates;
  constexpr int nu = kQuadrotorControls;
  const Matrix Q = quadrotor_state_weight(prm);
  const Vector u_hover = quadrotor_hover_control(prm);

  StageFunctions stage;
  stage.cost = [Q, u_hover](const Vector& x, const Vector& u, const Vector& d) {
    const Vector e = x - d;
    return e.dot(Q * e) + (u - u_hover).squaredNorm();
  };
  stage.cost_gradient = [Q, u_hover](const Vector& x, const Vector& u, const Vector& d) {
    Vector g(nx + nu + nx);
    const Vector qe = 2.0 * Q * (x - d);
    g << qe, 2.0 * (u - u_hover), -qe;
    return g;
  };
  stage.cost_hessian = [Q](const Vector&, const Vector&, const Vector&) {
    Matrix h = Matrix::Zero(nx + nu + nx, nx + nu + nx);
    h.block(0, 0, nx, nx) = 2.0 * Q;
    h.block(0, nx + nu, nx, nx) = -2.0 * Q;
    h.block(nx + nu, 0, nx, nx) = -2.0 * Q;
    h.block(nx + nu, nx + nu, nx, nx) = 2.0 * Q;
    h.block(nx, nx, nu, nu) = 2.0 * Matrix::Identity(nu, nu);
    return h;
  };
  stage.dynamics = [prm](const Vector& x, const Vector& u, const Vector&) { return quadrotor_rk4_step(x, u, prm); };
  stage.dynamics_jacobian = [prm](const Vector& x, const Vector& u, const Vector&) {
    Matrix j = Matrix::Zero(nx, nx + nu + nx);
    j.leftCols(nx + nu) = quadrotor_rk4_jacobian(x, u, prm);
    return j;
  };

  TerminalFunctions terminal;
  terminal.cost = [](const Vector& x, const Vector& d) { return (x - d).squaredNorm(); };
  terminal.cost_gradient = [](const Vector& x, const Vector& d) {
    Vector g(2 * nx);
    g << 2.0 * (x - d), -2.0 * (x - d);
    return g;
  };
  terminal.cost_hessian = [](const Vector&, const Vector&) {
    Matrix h(2 * nx, 2 * nx);
    const Matrix I = Matrix::Identity(nx, nx);
    h << 2.0 * I, -2.0 * I, -2.0 * I, 2.0 * I;
    return h;
  };

  const int N = prm.N;
  StageOracles oracles{std::vector<StageFunctions>(static_cast<std::size_t>(N), stage), terminal};
  DOProblem problem(Dimensions::uniform(N, nx, nu, nx, nx), std::move(oracles), Matrix::Identity(nx, nx));

  const Vector hover = quadrotor_hover_state(prm);
  DataTrajectory data = DataTrajectory::zeros(problem.dims());
  for (auto& di : data.d) di = hover;

  PrimalDualTrajectory warm = PrimalDualTrajectory::zeros(problem.dims());
  for (auto& xi : warm.x) xi = hover;
  for (auto& ui : warm.u) ui = u_hover;

  return {"quadrotor", std::move(problem), std::move(data), std::move(warm)};
}

StageFunctions lq_stage(const LQSpec& spec) {
  const int nx = spec.nx();
  const int nu = spec.nu();
  const Matrix A = spec.A, B = spec.B, Q = spec.Q, R = spec.R;
  const Matrix S = spec.S.size() == 0 ? Matrix::Zero(nx, nu) : spec.S;

  StageFunctions s;
  s.cost = [Q, R, S](const Vector& x, const Vector& u, const Vector& d) {
    const Vector e = x - d;
    return 0.5 * e.dot(Q * e) + 0.5 * u.dot(R * u) + x.dot(S * u);
  };
  s.cost_gradient = [Q, R, S, nx, nu](const Vector& x, const Vector& u, const Vector& d) {
    Vector g(nx + nu + nx);
    const Vector qe = Q * (x - d);
    g << qe + S * u, R * u + S.transpose() * x, -qe;
    return g;
  };
  s.cost_hessian = [Q, R, S, nx, nu](const Vector&, const Vector&, const Vector&) {
    Matrix h = Matrix::Zero(nx + nu + nx, nx + nu + nx);
    h.block(0, 0, nx, nx) = Q;
    h.block(0, nx, nx, nu) = S;
    h.block(nx, 0, nu, nx) = S.transpose();
    h.block(nx, nx, nu, nu) = R;
    h.block(0, nx + nu, nx, nx) = -Q;
    h.block(nx + nu, 0, nx, nx) = -Q;
    h.block(nx + nu, nx + nu, nx, nx) = Q;
    return h;
  };
  s.dynamics = [A, B](const Vector& x, const Vector& u, const Vector&) -> Vector { return A * x + B * u; };
  s.dynamics_jacobian = [A, B, nx, nu](const Vector&, const Vector&, const Vector&) {
    Matrix j = Matrix::Zero(nx, nx + nu + nx);
    j.leftCols(nx) = A;
    j.middleCols(nx, nu) = B;
    return j;
  };
  s.dynamics_curvature = [nx, nu](const Vector&, const Vector&, const Vector&, const Vector&) {
    return Matrix::Zero(nx + nu + nx, nx + nu + nx).eval();
  };
  return s;
}

TerminalFunctions lq_terminal(const LQSpec& spec) {
  const int nx = spec.nx();
  const Matrix Qf = spec.Qf;
  TerminalFunctions t;
  t.cost = [Qf](const Vector& x, const Vector& d) { return 0.5 * (x - d).dot(Qf * (x - d)); };
  t.cost_gradient = [Qf, nx](const Vector& x, const Vector& d) {
    Vector g(2 * nx);
    const Vector qe = Qf * (x - d);
    g << qe, -qe;
    return g;
  };
  t.cost_hessian = [Qf](const Vector&, const Vector&) {
    Matrix h(2 * Qf.rows(), 2 * Qf.rows());
    h << Qf, -Qf, -Qf, Qf;
    return h;
  };
  return t;
}

ModelInstance make_lq_problem(const LQSpec& spec, int N, const Vector& x_init, std::string name) {
  const int nx = spec.nx();
  const int nu = spec.nu();
  if (spec.A.cols() != nx || spec.B.rows() != nx || spec.Q.rows() != nx || spec.Q.cols() != nx ||
      spec.R.rows() != nu || spec.R.cols() != nu || spec.Qf.rows() != nx || spec.Qf.cols() != nx ||
      spec.T.cols() != nx) {
    throw ConfigurationError("inconsistent LQ matrices");
  }
  if (spec.S.size() != 0 && (spec.S.rows() != nx || spec.S.cols() != nu)) {
    throw ConfigurationError("S must be n_x x n_u");
  }
  const int n0 = static_cast<int>(spec.T.rows());
  if (x_init.size() != n0) throw ConfigurationError("initial data must have n_0 entries");

  StageOracles oracles{std::vector<StageFunctions>(static_cast<std::size_t>(N), lq_stage(spec)), lq_terminal(spec)};
  DOProblem problem(Dimensions::uniform(N, nx, nu, n0, nx), std::move(oracles), spec.T);
  DataTrajectory data = DataTrajectory::zeros(problem.dims());
  data.at(-1) = x_init;
  PrimalDualTrajectory warm = PrimalDualTrajectory::zeros(problem.dims());
  return {std::move(name), std::move(problem), std::move(data), std::move(warm)};
}

ModelInstance lq_chain(int nx, int nu, int N, double spectral_radius, std::uint64_t seed) {
  if (nx < 1 || nu < 0) throw ConfigurationError("lq_chain needs n_x >= 1 and n_u >= 0");
  if (!(spectral_radius >= 0.0)) throw ConfigurationError("spectral radius must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](int r, int c) {
    Matrix m(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) m(i, j) = normal(rng);
    return m;
  };

  LQSpec spec;
  spec.A = draw(nx, nx);
  const double radius = Eigen::EigenSolver<Matrix>(spec.A, false).eigenvalues().cwiseAbs().maxCoeff();
  if (radius > 0.0) spec.A *= spectral_radius / radius;
  spec.B = draw(nx, nu);
  spec.Q = Matrix::Identity(nx, nx);
  spec.R = Matrix::Identity(nu, nu);
  spec.Qf = Matrix::Identity(nx, nx);
  spec.T = Matrix::Identity(nx, nx);
  const Vector x_init = draw(nx, 1);
  return make_lq_problem(spec, N, x_init, "lq_chain");
}

LQSpec double_integrator_spec() {
  LQSpec spec;
  spec.A.resize(2, 2);
  spec.A << 1, 1, 0, 1;
  spec.B.resize(2, 1);
  spec.B << 0, 1;
  spec.Q = Matrix::Identity(2, 2);
  spec.R = Matrix::Identity(1, 1);
  spec.Qf = Matrix::Identity(2, 2);
  spec.T = Matrix::Identity(2, 2);
  return spec;
}

ModelInstance double_integrator(int N) {
  Vector x_init(2);
  x_init << 1, 0;
  return make_lq_problem(double_integrator_spec(), N, x_init, "double_integrator");
}

ModelInstance scalar_oracle() {
  LQSpec spec;
  spec.A = Matrix::Constant(1, 1, 1.0);
  spec.B = Matrix::Constant(1, 1, 1.0);
  spec.Q = Matrix::Constant(1, 1, 2.0);
  spec.R = Matrix::Constant(1, 1, 2.0);
  spec.Qf = Matrix::Constant(1, 1, 2.0);
  spec.T = Matrix::Constant(1, 1, 1.0);
  return make_lq_problem(spec, 1, Vector::Constant(1, 1.0), "scalar_oracle");
}

}  // namespace edslab
