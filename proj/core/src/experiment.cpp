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

#include "edslab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "edslab/errors.hpp"

namespace edslab {

namespace {

using json = nlohmann::json;

double param(const ModelParams& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

int int_param(const ModelParams& p, const std::string& key, int fallback) {
  const double v = param(p, key, fallback);
  if (v != static_cast<double>(static_cast<int>(v))) throw ConfigurationError("parameter '" + key + "' must be an integer");
  return static_cast<int>(v);
}

void check_known(const ModelPreset& preset, const ModelParams& p) {
  for (const auto& [key, value] : p) {
    if (std::find(preset.parameters.begin(), preset.parameters.end(), key) == preset.parameters.end()) {
      throw ConfigurationError("model '" + preset.name + "' has no parameter '" + key + "'");
    }
  }
}

}  // namespace

const std::vector<ModelPreset>& model_presets() {
  static const std::vector<ModelPreset> presets = {
      {"quadrotor", "9-state quadrotor, RK4 discretization, hover reference (default N = 60)",
       {"q", "b", "g", "dt", "altitude"}},
      {"lq_chain", "seeded random time-invariant LQ system (default N = 60)", {"nx", "nu", "spectral_radius", "seed"}},
      {"double_integrator", "A = [[1, 1], [0, 1]], B = [0; 1], unit weights (default N = 20)", {}},
      {"scalar_oracle", "N = 1 scalar LQ problem with a hand-derived solution", {}},
  };
  return presets;
}

ModelInstance build_model(const std::string& name, const ModelParams& params, int horizon) {
  const auto& presets = model_presets();
  const auto it = std::find_if(presets.begin(), presets.end(), [&](const ModelPreset& m) { return m.name == name; });
  if (it == presets.end()) throw ConfigurationError("unknown model '" + name + "'");
  check_known(*it, params);
  if (horizon < 0) throw ConfigurationError("horizon must be positive");

  if (name == "quadrotor") {
    QuadrotorParams qp;
    qp.q = param(params, "q", qp.q);
    qp.b = param(params, "b", qp.b);
    qp.g = param(params, "g", qp.g);
    qp.dt = param(params, "dt", qp.dt);
    qp.altitude = param(params, "altitude", qp.altitude);
    if (horizon > 0) qp.N = horizon;
    return quadrotor_problem(qp);
  }
  if (name == "lq_chain") {
    const double seed = param(params, "seed", 0.0);
    if (seed < 0.0 || seed != static_cast<double>(static_cast<std::uint64_t>(seed))) {
      throw ConfigurationError("lq_chain seed must be a nonnegative integer");
    }
    return lq_chain(int_param(params, "nx", 4), int_param(params, "nu", 2), horizon > 0 ? horizon : 60,
                    param(params, "spectral_radius", 0.9), static_cast<std::uint64_t>(seed));
  }
  if (name == "double_integrator") return double_integrator(horizon > 0 ? horizon : 20);
  if (horizon > 1) throw ConfigurationError("scalar_oracle has horizon 1");
  return scalar_oracle();
}

std::vector<CaseSpec> ExperimentConfig::effective_cases() const {
  std::vector<CaseSpec> out;
  if (cases.empty()) {
    out.push_back({"base", params});
    return out;
  }
  for (const auto& c : cases) {
    CaseSpec merged{c.label, params};
    for (const auto& [k, v] : c.params) merged.params[k] = v;
    out.push_back(std::move(merged));
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (model.empty()) throw ConfigurationError("config has no model name");
  if (replicates < 1) throw ConfigurationError("replicates must be >= 1");
  if (!(magnitude > 0.0)) throw ConfigurationError("perturbation magnitude must be positive");
  if (far_field_distance < 1) throw ConfigurationError("far_field_distance must be >= 1");
  if (!(contrast_margin >= 0.0)) throw ConfigurationError("contrast_margin must be nonnegative");
  if (output_dir.empty()) throw ConfigurationError("output_dir must not be empty");
  solver.validate();

  std::set<std::string> labels;
  for (const auto& c : effective_cases()) {
    if (c.label.empty()) throw ConfigurationError("case label must not be empty");
    if (c.label.find_first_of(",\n\"") != std::string::npos) throw ConfigurationError("case label has reserved characters");
    if (!labels.insert(c.label).second) throw ConfigurationError("duplicate case label '" + c.label + "'");
    const ModelInstance m = build_model(model, c.params, horizon);
    for (int j : stages) {
      if (j < -1 || j > m.problem.dims().N) {
        throw ConfigurationError("perturbation stage " + std::to_string(j) + " outside [-1, N]");
      }
    }
  }
}

namespace {

template <typename T>
T get(const json& obj, const char* key, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return it->get<T>();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw ConfigurationError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return key == k; }) == keys.end()) {
      throw ConfigurationError("unknown key '" + key + "' in " + where);
    }
  }
}

ModelParams parse_params(const json& obj, const std::string& where) {
  if (!obj.is_object()) throw ConfigurationError(where + " must be an object");
  ModelParams p;
  for (const auto& [key, value] : obj.items()) {
    if (!value.is_number()) throw ConfigurationError(where + "." + key + " must be a number");
    p[key] = value.get<double>();
  }
  return p;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(std::string("malformed config: ") + e.what());
  }

  ExperimentConfig cfg;
  try {
    reject_unknown(root,
                   {"model", "horizon", "perturbation", "seed", "solver", "certificate", "analysis", "output_dir",
                    "cases"},
                   "config");
    if (!root.contains("model")) throw ConfigurationError("config has no model");
    const json& model = root.at("model");
    if (model.is_string()) {
      cfg.model = model.get<std::string>();
    } else {
      reject_unknown(model, {"name", "params"}, "model");
      if (!model.contains("name")) throw ConfigurationError("model has no name");
      cfg.model = model.at("name").get<std::string>();
      if (model.contains("params")) cfg.params = parse_params(model.at("params"), "model.params");
    }
    cfg.horizon = get<int>(root, "horizon", 0);
    if (cfg.horizon < 0) throw ConfigurationError("horizon must be positive");
    if (root.contains("seed")) {
      const json& s = root.at("seed");
      if (!s.is_number_unsigned()) throw ConfigurationError("seed must be a nonnegative integer");
      cfg.seed = s.get<std::uint64_t>();
    }
    cfg.output_dir = get<std::string>(root, "output_dir", cfg.output_dir);

    if (root.contains("perturbation")) {
      const json& p = root.at("perturbation");
      reject_unknown(p, {"stages", "replicates", "magnitude", "primal_only"}, "perturbation");
      cfg.stages = get<std::vector<int>>(p, "stages", {});
      cfg.replicates = get<int>(p, "replicates", cfg.replicates);
      cfg.magnitude = get<double>(p, "magnitude", cfg.magnitude);
      cfg.primal_only = get<bool>(p, "primal_only", cfg.primal_only);
    }
    if (root.contains("solver")) {
      const json& s = root.at("solver");
      reject_unknown(s, {"tol_kkt", "max_iter", "reg0", "reg_max", "ls_beta", "ls_sigma"}, "solver");
      cfg.solver.tol_kkt = get<double>(s, "tol_kkt", cfg.solver.tol_kkt);
      cfg.solver.max_iter = get<int>(s, "max_iter", cfg.solver.max_iter);
      cfg.solver.reg0 = get<double>(s, "reg0", cfg.solver.reg0);
      cfg.solver.reg_max = get<double>(s, "reg_max", cfg.solver.reg_max);
      cfg.solver.ls_beta = get<double>(s, "ls_beta", cfg.solver.ls_beta);
      cfg.solver.ls_sigma = get<double>(s, "ls_sigma", cfg.solver.ls_sigma);
    }
    if (root.contains("certificate")) {
      const json& c = root.at("certificate");
      reject_unknown(c, {"window_ctrl", "window_obs"}, "certificate");
      cfg.window_ctrl = get<int>(c, "window_ctrl", cfg.window_ctrl);
      cfg.window_obs = get<int>(c, "window_obs", cfg.window_obs);
    }
    if (root.contains("analysis")) {
      const json& a = root.at("analysis");
      reject_unknown(a, {"far_field_distance", "contrast_margin"}, "analysis");
      cfg.far_field_distance = get<int>(a, "far_field_distance", cfg.far_field_distance);
      cfg.contrast_margin = get<double>(a, "contrast_margin", cfg.contrast_margin);
    }
    if (root.contains("cases")) {
      const json& cases = root.at("cases");
      if (!cases.is_array()) throw ConfigurationError("cases must be an array");
      for (const auto& c : cases) {
        reject_unknown(c, {"label", "params"}, "case");
        CaseSpec spec;
        spec.label = c.at("label").get<std::string>();
        if (c.contains("params")) spec.params = parse_params(c.at("params"), "case.params");
        cfg.cases.push_back(std::move(spec));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::uint64_t derive_seed(std::uint64_t seed, int case_index, int stage_index, int replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(case_index), static_cast<std::uint32_t>(stage_index),
                    static_cast<std::uint32_t>(replicate)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

bool RunResult::solver_failure() const {
  if (failed_solves > 0) return true;
  return std::any_of(cases.begin(), cases.end(), [](const CaseResult& c) { return !c.base_converged; });
}

int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("EDSLAB_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min<long>(n, cap);
  }
  return n;
}

namespace {

CaseResult solve_case(const ExperimentConfig& cfg, const CaseSpec& spec, ModelInstance& model) {
  CaseResult out;
  out.label = spec.label;
  out.dims = model.problem.dims();
  try {
    out.base = solve_equality_nlp(model.problem, model.base_data, model.warm_start, cfg.solver);
    out.base_converged = true;
  } catch (const NonconvergenceError& e) {
    out.base_error = e.what();
    out.base.w = e.last_iterate();
    out.base.residual = e.residual();
    return out;
  } catch (const Error& e) {
    out.base_error = e.what();
    return out;
  }
  try {
    ReportOptions ro;
    ro.window_ctrl = cfg.window_ctrl;
    ro.window_obs = cfg.window_obs;
    out.certificate = build_report(model.problem, out.base.w, model.base_data, ro);
  } catch (const Error& e) {
    out.certificate_error = e.what();
  }
  return out;
}

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto loop = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    loop();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  RunResult run;
  const auto cases = cfg.effective_cases();
  for (std::size_t c = 0; c < cases.size(); ++c) {
    ModelInstance model = build_model(cfg.model, cases[c].params, cfg.horizon);
    CaseResult res = solve_case(cfg, cases[c], model);
    if (!res.base_converged) {
      run.cases.push_back(std::move(res));
      continue;
    }

    std::vector<int> stages = cfg.stages;
    if (stages.empty()) stages.push_back(res.dims.N / 2);
    const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
    res.profiles.resize(stages.size() * reps);

    ExperimentOptions eo;
    eo.solver = cfg.solver;
    eo.primal_only = cfg.primal_only;
    parallel_for(res.profiles.size(), threads, [&](std::size_t k) {
      const int s = static_cast<int>(k / reps), r = static_cast<int>(k % reps);
      const std::uint64_t seed = derive_seed(cfg.seed, static_cast<int>(c), s, r);
      const PerturbationSpec ps = make_perturbation(res.dims, stages[static_cast<std::size_t>(s)], cfg.magnitude, seed);
      SensitivityProfile prof = run_perturbation_experiment(model.problem, model.base_data, res.base.w, ps, eo);
      prof.replicate = r;
      prof.seed = seed;
      res.profiles[k] = std::move(prof);
    });

    for (const auto& p : res.profiles) {
      if (!p.converged) {
        ++run.failed_solves;
        continue;
      }
      res.far_field_max = std::max(res.far_field_max, far_field_ratio(p, cfg.far_field_distance));
    }
    try {
      res.fit = fit_decay_envelope(res.profiles);
    } catch (const Error& e) {
      res.fit_error = e.what();
    }
    run.cases.push_back(std::move(res));
  }
  return run;
}

RunResult certify_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunResult run;
  for (const auto& spec : cfg.effective_cases()) {
    ModelInstance model = build_model(cfg.model, spec.params, cfg.horizon);
    run.cases.push_back(solve_case(cfg, spec, model));
  }
  return run;
}

}  // namespace edslab
