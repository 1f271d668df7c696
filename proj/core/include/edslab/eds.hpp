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

#include <cstdint>
#include <span>
#include <vector>

#include "edslab/kkt.hpp"
#include "edslab/problem.hpp"

namespace edslab {

/// A data perturbation confined to one stage j in [-1, N].
struct PerturbationSpec {
  int stage = 0;
  Vector delta;

  double magnitude() const { return delta.norm(); }
};

/// Unit vector drawn uniformly from the sphere in R^dim.
Vector random_direction(int dim, std::uint64_t seed);

PerturbationSpec make_perturbation(const Dimensions& dims, int stage, double magnitude, std::uint64_t seed);

struct SensitivityProfile {
  int j = 0;
  std::vector<double> s;  // s[i + 1] is the deviation at stage i, i in [-1, N]
  double magnitude = 0.0;
  bool converged = true;
  int replicate = 0;
  std::uint64_t seed = 0;

  double at(int stage) const { return s.at(static_cast<std::size_t>(stage + 1)); }
  int first_stage() const { return -1; }
  int last_stage() const { return static_cast<int>(s.size()) - 2; }
};

struct ExperimentOptions {
  SolveOptions solver;
  /// Restrict deviations to (x_i, u_i).
  bool primal_only = false;
};

/// Stage-wise deviation norms ||w_i - w'_i|| for i in [-1, N].
std::vector<double> stage_deviations(const PrimalDualTrajectory& a, const PrimalDualTrajectory& b,
                                     bool primal_only = false);

/// Solves P(d* + delta e_j) warm-started from w* and records the deviations.
SensitivityProfile run_perturbation_experiment(const DOProblem& p, const DataTrajectory& d_star,
                                               const PrimalDualTrajectory& w_star, const PerturbationSpec& spec,
                                               const ExperimentOptions& opts = {});

enum class FitMode { LeastSquares, UpperEnvelope };

struct DecayFit {
  double upsilon = 0.0;
  double rho = 1.0;
  double r2 = 0.0;
  FitMode mode = FitMode::LeastSquares;
  double floor_abs = 1e-12;
  double floor_rel = 1e-9;
  int points = 0;
  bool clamped = false;   // the raw slope gave rho > 1
  bool no_decay = false;  // rho == 1 after clamping
};

struct FitOptions {
  double floor_abs = 1e-12;
  double floor_rel = 1e-9;
};

/// max(floor_abs, floor_rel * max_i s_i)
double profile_floor(const SensitivityProfile& profile, double floor_abs, double floor_rel);

/// Pooled log-linear least squares of log(s_i / magnitude) on |i - j|:
/// Upsilon = exp(intercept), rho = exp(slope) clamped to (0, 1].
/// Throws ConfigurationError when fewer than three points lie above the floor.
DecayFit fit_decay(std::span<const SensitivityProfile> profiles, const FitOptions& opts = {});

/// Keeps rho from the least-squares fit and raises Upsilon to the smallest value
/// for which no point above the floor exceeds Upsilon rho^|i-j| magnitude.
DecayFit fit_decay_envelope(std::span<const SensitivityProfile> profiles, const FitOptions& opts = {});

struct EnvelopeCheck {
  int violations = 0;
  int checked = 0;
  double worst_ratio = 0.0;
};

/// Counts entries with s_i > slack Upsilon rho^|i-j| magnitude. Entries at or
/// below the fit's floor are solver noise and are skipped.
EnvelopeCheck verify_eds_bound(std::span<const SensitivityProfile> profiles, const DecayFit& fit, double slack);

struct DecayContrast {
  double rho_a = 0.0;
  double rho_b = 0.0;
  bool a_decays_faster = false;  // rho_a + margin < rho_b
};

DecayContrast decay_contrast(const DecayFit& a, const DecayFit& b, double margin = 0.05);

/// Largest s_i / max_k s_k over stages at distance >= `distance` from j.
double far_field_ratio(const SensitivityProfile& profile, int distance);

}  // namespace edslab
