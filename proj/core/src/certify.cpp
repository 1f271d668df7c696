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

#include "edslab/certify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "edslab/errors.hpp"

namespace edslab {

namespace {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double min_eigenvalue(const Matrix& sym) {
  if (sym.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// lambda_min of a Gramian, with rounding-level values relative to its largest
/// eigenvalue reported as exactly zero.
double gramian_min(const Matrix& gram) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double top = std::max(std::abs(ev(ev.size() - 1)), 1.0);
  const double lo = ev(0);
  return std::abs(lo) <= 1e-12 * top ? 0.0 : lo;
}

void check_window(int i, int j, int stages) {
  if (i < 0 || j < i || j >= stages) {
    throw ConfigurationError("window [" + std::to_string(i) + ", " + std::to_string(j) + "] out of range");
  }
}

WindowScan finish_scan(int window, std::vector<double> values) {
  WindowScan scan;
  scan.window_length = window;
  scan.values = std::move(values);
  scan.minimum = scan.values.empty() ? 0.0 : *std::min_element(scan.values.begin(), scan.values.end());
  return scan;
}

}  // namespace

Matrix controllability_matrix(std::span<const Matrix> A, std::span<const Matrix> B, int i, int j) {
  check_window(i, j, static_cast<int>(B.size()));
  if (j > i && static_cast<int>(A.size()) <= j) throw ConfigurationError("not enough A matrices for window");
  const auto rows = B[static_cast<std::size_t>(j)].rows();
  Eigen::Index cols = 0;
  for (int k = i; k <= j; ++k) cols += B[static_cast<std::size_t>(k)].cols();

  Matrix C(rows, cols);
  Matrix P = Matrix::Identity(rows, rows);  // A_j ... A_{k+1}
  Eigen::Index right = cols;
  for (int k = j; k >= i; --k) {
    const auto& Bk = B[static_cast<std::size_t>(k)];
    right -= Bk.cols();
    C.middleCols(right, Bk.cols()) = P * Bk;
    if (k > i) P = P * A[static_cast<std::size_t>(k)];
  }
  return C;
}

Matrix observability_matrix(std::span<const Matrix> A, std::span<const Matrix> Q, int i, int j) {
  check_window(i, j, static_cast<int>(Q.size()));
  if (j > i && static_cast<int>(A.size()) < j) throw ConfigurationError("not enough A matrices for window");
  const auto n = Q[static_cast<std::size_t>(i)].cols();
  Eigen::Index rows = 0;
  for (int k = i; k <= j; ++k) rows += Q[static_cast<std::size_t>(k)].rows();

  Matrix O(rows, n);
  Matrix P = Matrix::Identity(n, n);  // A_{k-1} ... A_i
  Eigen::Index bottom = rows;
  for (int k = i; k <= j; ++k) {
    const auto& Qk = Q[static_cast<std::size_t>(k)];
    bottom -= Qk.rows();
    O.middleRows(bottom, Qk.rows()) = Qk * P;
    if (k < j) P = A[static_cast<std::size_t>(k)] * P;
  }
  return O;
}

Matrix controllability_matrix(const StageBlocks& blocks, int i, int j) {
  check_window(i, j, blocks.dims.N);
  return controllability_matrix(blocks.A, blocks.B, i, j);
}

Matrix observability_matrix(const StageBlocks& blocks, int i, int j) {
  check_window(i, j, blocks.dims.N + 1);
  return observability_matrix(blocks.A, blocks.Q, i, j);
}

WindowScan scan_controllability(std::span<const Matrix> A, std::span<const Matrix> B, int stages, int window) {
  if (window < 0 || window > stages - 1) throw ConfigurationError("controllability window out of range");
  std::vector<double> values;
  for (int i = 0; i + window <= stages - 1; ++i) {
    const Matrix C = controllability_matrix(A, B, i, i + window);
    values.push_back(gramian_min(C * C.transpose()));
  }
  return finish_scan(window, std::move(values));
}

WindowScan scan_observability(std::span<const Matrix> A, std::span<const Matrix> Q, int stages, int window) {
  if (window < 0 || window > stages - 1) throw ConfigurationError("observability window out of range");
  std::vector<double> values;
  for (int i = 0; i + window <= stages - 1; ++i) {
    const Matrix O = observability_matrix(A, Q, i, i + window);
    values.push_back(gramian_min(O.transpose() * O));
  }
  return finish_scan(window, std::move(values));
}

WindowScan scan_uniform_controllability(const StageBlocks& blocks, int window) {
  return scan_controllability(blocks.A, blocks.B, blocks.dims.N, window);
}

WindowScan scan_uniform_observability(const StageBlocks& blocks, int window) {
  return scan_observability(blocks.A, blocks.Q, blocks.dims.N, window);
}

DualityCheck duality_check(std::span<const Matrix> A, std::span<const Matrix> B, int window) {
  const int N = static_cast<int>(B.size());
  std::vector<Matrix> At(static_cast<std::size_t>(N));
  std::vector<Matrix> Bt(static_cast<std::size_t>(N));
  for (int k = 0; k < N; ++k) {
    const auto src = static_cast<std::size_t>(N - 1 - k);
    At[static_cast<std::size_t>(k)] = src < A.size() ? A[src].transpose() : Matrix();
    Bt[static_cast<std::size_t>(k)] = B[src].transpose();
  }
  const WindowScan ctrl = scan_controllability(A, B, N, window);
  const WindowScan obs = scan_observability(At, Bt, N, window);

  DualityCheck out;
  out.controllability_min = ctrl.minimum;
  out.observability_min = obs.minimum;
  const std::size_t m = ctrl.values.size();
  for (std::size_t i = 0; i < m; ++i) {
    // Window [i, i + window] maps to the dual window [N-1-(i+window), N-1-i].
    const double c = ctrl.values[i];
    const double o = obs.values[m - 1 - i];
    const double scale = std::max(std::abs(c), std::abs(o));
    const double rel = scale == 0.0 ? 0.0 : std::abs(c - o) / scale;
    out.max_discrepancy = std::max(out.max_discrepancy, rel);
  }
  const double scale = std::max(std::abs(ctrl.minimum), std::abs(obs.minimum));
  const double min_rel = scale == 0.0 ? 0.0 : std::abs(ctrl.minimum - obs.minimum) / scale;
  out.agree = out.max_discrepancy <= 1e-9 && min_rel <= 1e-9;
  return out;
}

DualityCheck duality_check(const StageBlocks& blocks, int window) { return duality_check(blocks.A, blocks.B, window); }

double licq_modulus(const Matrix& J) {
  if (J.rows() == 0) return std::numeric_limits<double>::infinity();
  if (J.rows() > J.cols()) return 0.0;
  Eigen::BDCSVD<Matrix> svd(J);
  const double smin = svd.singularValues()(J.rows() - 1);
  return smin * smin;
}

SoscModulus sosc_modulus(const Matrix& H, const Matrix& J) {
  const auto n = H.rows();
  if (H.cols() != n || J.cols() != n) throw ConfigurationError("H and J have inconsistent sizes");
  const auto m = J.rows();
  if (m == 0) return {min_eigenvalue(0.5 * (H + H.transpose())), false};
  if (m > n) throw RegularityError("J has more rows than columns; check licq_modulus");

  Eigen::ColPivHouseholderQR<Matrix> qr(J.transpose());
  if (qr.rank() < m) throw RegularityError("J is rank deficient; check licq_modulus");
  if (m == n) return SoscModulus::trivial_null_space();

  const Matrix Qfull = qr.householderQ();
  const Matrix Z = Qfull.rightCols(n - m);
  const Matrix reduced = Z.transpose() * H * Z;
  return {min_eigenvalue(0.5 * (reduced + reduced.transpose())), false};
}

Matrix lagrangian_mixed_hessian(const StageBlocks& blocks) {
  const auto& dims = blocks.dims;
  const int nz = dims.primal_size();
  const int nc = dims.dual_size();
  std::vector<int> data_offset(static_cast<std::size_t>(dims.N + 2));
  int nd_total = 0;
  for (int i = -1; i <= dims.N; ++i) {
    data_offset[static_cast<std::size_t>(i + 1)] = nd_total;
    nd_total += dims.data_dim(i);
  }

  const int nw = nz + nc;
  Matrix M = Matrix::Zero(nw, nw + nd_total);
  const Matrix H = assemble_hessian(blocks);
  const Matrix J = assemble_jacobian(blocks);
  // w-w part: [[H, -J^T], [-J, 0]]
  M.topLeftCorner(nz, nz) = H;
  M.block(0, nz, nz, nc) = -J.transpose();
  M.block(nz, 0, nc, nz) = -J;

  auto dcol = [&](int stage) { return nw + data_offset[static_cast<std::size_t>(stage + 1)]; };
  for (int i = 0; i < dims.N; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const int nd = dims.data_dim(i);
    M.block(dims.x_offset(i), dcol(i), dims.nx, nd) = blocks.E[s];
    M.block(dims.u_offset(i), dcol(i), dims.nu, nd) = blocks.F[s];
    M.block(nz + dims.constraint_offset(i), dcol(i), dims.nx, nd) = blocks.G[s];
  }
  M.block(dims.x_offset(dims.N), dcol(dims.N), dims.nx, dims.data_dim(dims.N)) =
      blocks.E[static_cast<std::size_t>(dims.N)];
  if (dims.n0 > 0) M.block(nz, dcol(-1), dims.n0, dims.n0).setIdentity();
  return M;
}

double blh_modulus(const StageBlocks& blocks) {
  const Matrix M = lagrangian_mixed_hessian(blocks);
  // ||M|| = sqrt(lambda_max(M M^T)); M has fewer rows than columns.
  const Matrix gram = M * M.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(es.eigenvalues()(es.eigenvalues().size() - 1), 0.0));
}

double blh_modulus(const DOProblem& p, const PrimalDualTrajectory& w, const DataTrajectory& d) {
  return blh_modulus(linearize(p, w, d));
}

double blh_bound_from_K(double K) {
  if (!(K >= 0.0)) throw std::invalid_argument("K must be nonnegative");
  return 4.0 * std::max(4.0 * K, 1.0);
}

double block_bound(const StageBlocks& blocks) {
  double K = spectral_norm(blocks.T);
  for (const auto* seq : {&blocks.Q, &blocks.R, &blocks.S, &blocks.A, &blocks.B, &blocks.E, &blocks.F, &blocks.G}) {
    for (const auto& m : *seq) K = std::max(K, spectral_norm(m));
  }
  return K;
}

namespace {

WindowScan pick_window(const StageBlocks& blocks, int requested, bool controllability) {
  auto scan = [&](int w) {
    return controllability ? scan_uniform_controllability(blocks, w) : scan_uniform_observability(blocks, w);
  };
  if (requested >= 0) return scan(requested);
  const int last = std::min(blocks.dims.nx, blocks.dims.N - 1);
  WindowScan result;
  for (int w = 0; w <= last; ++w) {
    result = scan(w);
    if (result.minimum > 0.0) break;
  }
  return result;
}

}  // namespace

CertificateReport build_report(const StageBlocks& blocks, const ReportOptions& opts) {
  const auto& dims = blocks.dims;
  CertificateReport rep;
  const Matrix J = assemble_jacobian(blocks);
  const Matrix H = assemble_hessian(blocks);
  rep.beta = licq_modulus(J);
  try {
    rep.gamma = sosc_modulus(H, J);
  } catch (const RegularityError&) {
    rep.gamma = {0.0, false};
  }
  rep.L_observed = blh_modulus(blocks);
  rep.K = block_bound(blocks);
  rep.L_bound = blh_bound_from_K(rep.K);

  rep.r = std::numeric_limits<double>::infinity();
  for (const auto& R : blocks.R) rep.r = std::min(rep.r, min_eigenvalue(0.5 * (R + R.transpose())));
  if (dims.n0 > 0) rep.delta = min_eigenvalue(blocks.T * blocks.T.transpose());

  rep.ctrl = pick_window(blocks, opts.window_ctrl, true);
  rep.obs = pick_window(blocks, opts.window_obs, false);

  rep.flag_K_bounded = std::isfinite(rep.K);
  rep.flag_delta = !rep.delta || *rep.delta > opts.psd_tol;
  rep.flag_controllable = rep.ctrl.minimum > 0.0;
  rep.flag_observable = rep.obs.minimum > 0.0;
  rep.flag_Q_psd = std::all_of(blocks.Q.begin(), blocks.Q.end(), [&](const Matrix& Q) {
    return min_eigenvalue(0.5 * (Q + Q.transpose())) >= -opts.psd_tol * std::max(1.0, spectral_norm(Q));
  });
  rep.flag_S_zero = std::all_of(blocks.S.begin(), blocks.S.end(), [&](const Matrix& S) {
    return S.size() == 0 || S.cwiseAbs().maxCoeff() <= opts.S_zero_tol;
  });
  rep.flag_R_pd = rep.r > opts.psd_tol;
  return rep;
}

CertificateReport build_report(const DOProblem& p, const PrimalDualTrajectory& w, const DataTrajectory& d,
                               const ReportOptions& opts) {
  return build_report(linearize(p, w, d), opts);
}

std::string to_key_value(const CertificateReport& rep, const std::string& label) {
  std::ostringstream os;
  os << std::setprecision(17);
  auto flag = [](bool b) { return b ? "true" : "false"; };
  if (!label.empty()) os << "case = " << label << '\n';
  os << "beta = " << rep.beta << '\n';
  if (rep.gamma.vacuous) {
    os << "gamma = inf\n";
  } else {
    os << "gamma = " << rep.gamma.gamma << '\n';
  }
  os << "L_observed = " << rep.L_observed << '\n';
  os << "L_bound = " << rep.L_bound << '\n';
  os << "K = " << rep.K << '\n';
  os << "r = " << rep.r << '\n';
  if (rep.delta) {
    os << "delta = " << *rep.delta << '\n';
  } else {
    os << "delta = absent\n";
  }
  os << "N_c = " << rep.ctrl.window_length << '\n';
  os << "beta_c = " << rep.ctrl.minimum << '\n';
  os << "N_o = " << rep.obs.window_length << '\n';
  os << "gamma_o = " << rep.obs.minimum << '\n';
  os << "licq = " << flag(rep.licq()) << '\n';
  os << "sosc = " << flag(rep.gamma.positive()) << '\n';
  os << "blh_within_bound = " << flag(rep.L_observed <= rep.L_bound) << '\n';
  os << "flag_K_bounded = " << flag(rep.flag_K_bounded) << '\n';
  os << "flag_delta = " << flag(rep.flag_delta) << '\n';
  os << "flag_controllable = " << flag(rep.flag_controllable) << '\n';
  os << "flag_Q_psd = " << flag(rep.flag_Q_psd) << '\n';
  os << "flag_S_zero = " << flag(rep.flag_S_zero) << '\n';
  os << "flag_R_pd = " << flag(rep.flag_R_pd) << '\n';
  os << "flag_observable = " << flag(rep.flag_observable) << '\n';
  os << "corollary_hypotheses = " << flag(rep.corollary_hypotheses()) << '\n';
  return os.str();
}

}  // namespace edslab
