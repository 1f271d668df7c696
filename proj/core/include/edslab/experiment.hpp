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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edslab/certify.hpp"
#include "edslab/eds.hpp"
#include "edslab/kkt.hpp"
#include "edslab/models.hpp"

namespace edslab {

/// Numeric model parameters by name, e.g. {"q": 0, "b": 0}.
using ModelParams = std::map<std::string, double>;

struct ModelPreset {
  std::string name;
  std::string description;
  std::vector<std::string> parameters;
};

const std::vector<ModelPreset>& model_presets();

/// Throws ConfigurationError for unknown names or parameters.
ModelInstance build_model(const std::string& name, const ModelParams& params, int horizon);

struct CaseSpec {
  std::string label;
  ModelParams params;  // overrides applied on top of the shared parameters
};

struct ExperimentConfig {
  std::string model;
  ModelParams params;
  int horizon = 0;  // 0 keeps the model's default
  std::vector<int> stages;
  int replicates = 1;
  double magnitude = 0.1;
  bool primal_only = false;
  std::uint64_t seed = 0;
  SolveOptions solver;
  int window_ctrl = -1;
  int window_obs = -1;
  int far_field_distance = 15;
  double contrast_margin = 0.05;
  std::string output_dir = "edslab_out";
  std::vector<CaseSpec> cases;  // empty means one case labelled "base"

  /// Checks model name, stage range, replicate count and option ranges.
  void validate() const;
  std::vector<CaseSpec> effective_cases() const;
};

/// JSON text to config; throws ConfigurationError on malformed input.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Independent stream seed for one perturbed solve.
std::uint64_t derive_seed(std::uint64_t seed, int case_index, int stage_index, int replicate);

struct CaseResult {
  std::string label;
  Dimensions dims;
  bool base_converged = false;
  std::string base_error;
  SolveResult base;
  std::optional<CertificateReport> certificate;
  std::string certificate_error;
  std::vector<SensitivityProfile> profiles;
  std::optional<DecayFit> fit;
  std::string fit_error;
  double far_field_max = 0.0;  // worst far_field_ratio over converged profiles
};

struct RunResult {
  std::vector<CaseResult> cases;
  int failed_solves = 0;

  bool solver_failure() const;
};

/// Hardware concurrency, capped by EDSLAB_THREADS when that is a positive integer.
int worker_count();

/// Base solve, certificate and perturbation sweep for each case. Results do not
/// depend on the number of threads.
RunResult run_experiment(const ExperimentConfig& config, int threads = 1);

/// Base solve and certificate only.
RunResult certify_experiment(const ExperimentConfig& config);

}  // namespace edslab
