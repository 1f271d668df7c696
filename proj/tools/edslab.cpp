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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "edslab/errors.hpp"
#include "edslab/experiment.hpp"
#include "edslab/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolverFailure = 2;
constexpr int kExitConfigError = 3;

int run_command(const std::string& config_path, const std::optional<std::string>& out,
                const std::optional<std::uint64_t>& seed) {
  edslab::ExperimentConfig cfg;
  try {
    cfg = edslab::load_config(config_path);
    if (out) cfg.output_dir = *out;
    if (seed) cfg.seed = *seed;
    cfg.validate();
  } catch (const edslab::ConfigurationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  const edslab::RunResult run = edslab::run_experiment(cfg, edslab::worker_count());
  edslab::write_run_outputs(cfg.output_dir, cfg, run);
  edslab::write_summary(std::cout, cfg, run);
  if (run.solver_failure()) {
    std::cerr << "solver failure: see " << cfg.output_dir << "/manifest.txt\n";
    return kExitSolverFailure;
  }
  return kExitOk;
}

int certify_command(const std::string& config_path) {
  edslab::ExperimentConfig cfg;
  try {
    cfg = edslab::load_config(config_path);
    cfg.validate();
  } catch (const edslab::ConfigurationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
  const edslab::RunResult run = edslab::certify_experiment(cfg);
  edslab::write_certificates(std::cout, run);
  return run.solver_failure() ? kExitSolverFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensitivity experiments and certificates for dynamic optimization problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "solve, certify and run the perturbation sweep");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out, "output directory (overrides the config)");
  run->add_option("--seed", seed, "random seed (overrides the config)");

  auto* certify = app.add_subcommand("certify", "solve the base problem and print the certificate report");
  certify->add_option("--config", config_path, "experiment config (JSON)")->required();

  app.add_subcommand("models", "list model presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*run) return run_command(config_path, out, seed);
    if (*certify) return certify_command(config_path);
    for (const auto& m : edslab::model_presets()) {
      std::cout << m.name << "  " << m.description;
      if (!m.parameters.empty()) {
        std::cout << "  [";
        for (std::size_t k = 0; k < m.parameters.size(); ++k) std::cout << (k ? ", " : "") << m.parameters[k];
        std::cout << ']';
      }
      std::cout << '\n';
    }
    return kExitOk;
  } catch (const edslab::ConfigurationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  }
}
