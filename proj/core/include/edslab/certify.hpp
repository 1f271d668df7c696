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

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edslab/kkt.hpp"
#include "edslab/problem.hpp"
#include "edslab/types.hpp"

namespace edslab {

/// Minimum eigenvalue of a windowed Gramian for every window of one length.
struct WindowScan {
  int window_length = 0;  // j - i
  std::vector<double> values;  // values[i] belongs to the window [i, i + window_length]
  double minimum = 0.0;
};

// Sequence forms act on arbitrary matrix sequences (used by the duality check);
// the StageBlocks forms read A, B, Q from a linearization.

/// [A_{i+1:j} B_i, ..., A_j B_{j-1}, B_j] with A_{a:b} = A_b ... A_a.
Matrix controllability_matrix(std::span<const Matrix> A, std::span<const Matrix> B, int i, int j);
/// [Q_j A_{i:j-1}; ...; Q_{i+1} A_i; Q_i].
Matrix observability_matrix(std::span<const Matrix> A, std::span<const Matrix> Q, int i, int j);

Matrix controllability_matrix(const StageBlocks& blocks, int i, int j);
Matrix observability_matrix(const StageBlocks& blocks, int i, int j);

/// Windows [i, i + window] inside [0, stages - 1].
WindowScan scan_controllability(std::span<const Matrix> A, std::span<const Matrix> B, int stages, int window);
WindowScan scan_observability(std::span<const Matrix> A, std::span<const Matrix> Q, int stages, int window);

WindowScan scan_uniform_controllability(const StageBlocks& blocks, int window);
WindowScan scan_uniform_observability(const StageBlocks& blocks, int window);

struct DualityCheck {
  bool agree = false;
  double max_discrepancy = 0.0;  // relative, over all windows
  double controllability_min = 0.0;
  double observability_min = 0.0;
};

/// Compares the controllability scan of (A_i, B_i) with the observability scan
/// of the reversed transposed sequences (A_{N-1-k}^T, B_{N-1-k}^T).
DualityCheck duality_check(std::span<const Matrix> A, std::span<const Matrix> B, int window);
DualityCheck duality_check(const StageBlocks& blocks, int window);

/// lambda_min(J J^T) as the squared smallest singular value of J.
double licq_modulus(const Matrix& J);

/// Reduced-Hessian modulus; `vacuous` (and gamma = +inf) when J has a trivial
/// null space.
struct SoscModulus {
  double gamma = 0.0;
  bool vacuous = false;

  static SoscModulus trivial_null_space() { return {std::numeric_limits<double>::infinity(), true}; }
  bool positive() const { return vacuous || gamma > 0.0; }
};

/// lambda_min(Z^T H Z) for an orthonormal null-space basis Z of J.
/// Throws RegularityError if J is rank deficient.
SoscModulus sosc_modulus(const Matrix& H, const Matrix& J);

/// The mixed second derivative of the Lagrangian in (w, xi), xi_i = [w_i; d_i],
/// as a dense matrix with rows ordered [z; lambda] and columns [z; lambda; d].
Matrix lagrangian_mixed_hessian(const StageBlocks& blocks);

double blh_modulus(const StageBlocks& blocks);
double blh_modulus(const DOProblem& p, const PrimalDualTrajectory& w, const DataTrajectory& d);

/// Explicit uBLH constant 4 max(4K, 1) for K-bounded blocks.
double blh_bound_from_K(double K);

/// Largest spectral norm over Q, R, S, A, B, E, F, G and T.
double block_bound(const StageBlocks& blocks);

struct CertificateReport {
  double beta = 0.0;
  SoscModulus gamma;
  double L_observed = 0.0;
  double L_bound = 0.0;
  double K = 0.0;
  double r = 0.0;
  std::optional<double> delta;  // absent when n0 = 0

  /// Last scan performed; its minimum is beta_c (resp. gamma_o). With automatic
  /// window selection this is the first window length with a positive minimum,
  /// or the longest one tried.
  WindowScan ctrl;
  WindowScan obs;

  bool flag_K_bounded = false;
  bool flag_delta = false;
  bool flag_controllable = false;
  bool flag_Q_psd = false;
  bool flag_S_zero = false;
  bool flag_R_pd = false;
  bool flag_observable = false;

  /// Every sufficient condition of the system-theoretic corollary holds.
  bool corollary_hypotheses() const {
    return flag_K_bounded && flag_delta && flag_controllable && flag_Q_psd && flag_S_zero && flag_R_pd &&
           flag_observable;
  }
  bool licq() const { return beta > 0.0; }
};

struct ReportOptions {
  /// Window lengths for the Gramian scans; negative means "smallest window in
  /// [0, min(n_x, N-1)] with a positive minimum".
  int window_ctrl = -1;
  int window_obs = -1;
  double S_zero_tol = 1e-8;
  double psd_tol = 1e-10;
};

CertificateReport build_report(const StageBlocks& blocks, const ReportOptions& opts = {});
CertificateReport build_report(const DOProblem& p, const PrimalDualTrajectory& w, const DataTrajectory& d,
                               const ReportOptions& opts = {});

/// Flat `key = value` text block.
std::string to_key_value(const CertificateReport& report, const std::string& label = "");

}  // namespace edslab
