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

// Prints one PASS/FAIL line per acceptance criterion; exit status is nonzero
// if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "edslab/certify.hpp"
#include "edslab/eds.hpp"
#include "edslab/experiment.hpp"
#include "edslab/kkt.hpp"
#include "edslab/models.hpp"
#include "edslab/steady_state.hpp"
#include "oracles.hpp"

using namespace edslab;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and limits.
constexpr double kOracleTol = 1e-8;
constexpr double kOracleSeconds = 1.0;
constexpr double kDenseTol = 1e-8;
constexpr double kDenseSeconds = 10.0;
constexpr double kUniformFloor = 0.5;
constexpr double kDecayCeiling = 0.2;
constexpr double kUniformSeconds = 30.0;
constexpr double kDualityTol = 1e-9;
constexpr double kRhoMax = 0.95;
constexpr double kR2Min = 0.8;
constexpr double kChainSeconds = 120.0;
constexpr double kContrastMargin = 0.05;
constexpr double kFarFieldRatio = 0.05;
constexpr double kQuadrotorSeconds = 300.0;
constexpr double kCorollaryTol = 1e-8;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int failures = 0;

void criterion(const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0.0 && secs > limit_s) {
    o.pass = false;
    o.detail += "; over time limit " + fmt("%.0f s", limit_s);
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

StageBlocks lq_blocks(const LQSpec& spec, int N) {
  const ModelInstance m = make_lq_problem(spec, N, Vector::Zero(spec.T.rows()));
  return linearize(m.problem, m.warm_start, m.base_data);
}

double spectral_norm(const Matrix& M) { return Eigen::JacobiSVD<Matrix>(M).singularValues()(0); }

Outcome oracle() {
  const ModelInstance m = scalar_oracle();
  const SolveResult r = solve_equality_nlp(m.problem, m.base_data, m.warm_start);
  Vector got(5), want(5);
  got << r.w.x[0][0], r.w.u[0][0], r.w.x[1][0], r.w.lam(-1)[0], r.w.lam(0)[0];
  want << 1.0, -0.5, 0.5, 3.0, 1.0;
  const double err = (got - want).cwiseAbs().maxCoeff();
  return {err <= kOracleTol, fmt("max error %.2e", err)};
}

Outcome dense_equivalence() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nx_d(1, 4), nu_d(1, 3), N_d(1, 20);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int nx = nx_d(rng), nu = nu_d(rng), N = N_d(rng);
    const LQSpec spec = ref::random_lq_spec(rng, nx, nu);
    const Vector x0 = ref::random_matrix(rng, nx, 1);
    const ModelInstance m = make_lq_problem(spec, N, x0);
    const SolveResult r = solve_equality_nlp(m.problem, m.base_data, m.warm_start);
    const ref::DenseSolution ref = ref::dense_lq_solve(spec, N, x0);
    worst = std::max(worst, (r.w.primal() - ref.z).norm() / std::max(1.0, ref.z.norm()));
    worst = std::max(worst, (r.w.dual() - ref.lambda).norm() / std::max(1.0, ref.lambda.norm()));
  }
  return {worst <= kDenseTol, fmt("worst relative error %.2e over 20 instances", worst)};
}

Outcome blh_bound() {
  std::mt19937_64 rng(99);
  const double Ks[] = {0.5, 1.0, 2.0};
  double worst = 0.0;
  bool ok = true;
  for (int k = 0; k < 20; ++k) {
    const double K = Ks[k % 3];
    LQSpec s = ref::random_lq_spec(rng, 1 + k % 4, 1 + k % 3);
    for (Matrix* M : {&s.A, &s.B, &s.Q, &s.R, &s.S, &s.Qf}) *M *= K / std::max(spectral_norm(*M), 1e-12);
    s.T *= std::min(K, 1.0);
    const StageBlocks b = lq_blocks(s, 3 + k);
    if (block_bound(b) > K * (1.0 + 1e-12)) return {false, "generator broke the K bound"};
    const double ratio = blh_modulus(b) / blh_bound_from_K(K);
    worst = std::max(worst, ratio);
    ok = ok && ratio <= 1.0;
  }
  return {ok, fmt("max L_observed / 4max(4K,1) = %.3f", worst)};
}

Outcome licq_uniformity() {
  LQSpec flat;
  flat.A = flat.T = flat.Q = flat.Qf = flat.R = Matrix::Identity(1, 1);
  flat.B = Matrix::Zero(1, 1);
  std::vector<double> di, fl;
  for (int N : {10, 20, 40, 80}) {
    di.push_back(licq_modulus(assemble_jacobian(lq_blocks(double_integrator_spec(), N))));
    fl.push_back(licq_modulus(assemble_jacobian(lq_blocks(flat, N))));
  }
  const double dmin = *std::min_element(di.begin(), di.end());
  const bool ok = dmin >= kUniformFloor * di.front() && fl.back() < kDecayCeiling * fl.front();
  return {ok, fmt("controllable min/N10 = %.3f", dmin / di.front()) +
                  fmt(", uncontrollable N80/N10 = %.4f", fl.back() / fl.front())};
}

Outcome sosc_uniformity() {
  LQSpec obs;
  obs.A = obs.B = obs.Q = obs.Qf = obs.T = obs.R = Matrix::Identity(2, 2);
  LQSpec hidden = obs;
  hidden.Q = hidden.Qf = Vector::Unit(2, 0).asDiagonal().toDenseMatrix();
  auto gamma = [](const LQSpec& s, int N) {
    const StageBlocks b = lq_blocks(s, N);
    return sosc_modulus(assemble_hessian(b), assemble_jacobian(b)).gamma;
  };
  std::vector<double> go, gh;
  for (int N : {10, 20, 40, 80}) {
    go.push_back(gamma(obs, N));
    gh.push_back(gamma(hidden, N));
  }
  const double omin = *std::min_element(go.begin(), go.end());
  const bool ok = omin >= kUniformFloor * go.front() && gh.back() < kDecayCeiling * gh.front();
  return {ok, fmt("observable min/N10 = %.3f", omin / go.front()) +
                  fmt(", unobservable N80/N10 = %.4f", gh.back() / gh.front())};
}

Outcome duality() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(1, 3), len(4, 12);
  double worst = 0.0;
  bool ok = true;
  for (int k = 0; k < 50; ++k) {
    const int nx = dim(rng), nu = dim(rng), N = len(rng);
    std::vector<Matrix> A, B;
    for (int i = 0; i < N; ++i) {
      A.push_back(ref::random_matrix(rng, nx, nx));
      B.push_back(ref::random_matrix(rng, nx, nu));
    }
    const DualityCheck d = duality_check(A, B, k % std::min(N, 4));
    worst = std::max(worst, d.max_discrepancy);
    ok = ok && d.agree && d.max_discrepancy <= kDualityTol;
  }
  return {ok, fmt("worst relative discrepancy %.2e over 50 sequences", worst)};
}

Outcome lq_chain_eds() {
  const ExperimentConfig cfg = load_config(std::string(EDSLAB_CONFIG_DIR) + "/lq_chain.json");
  const RunResult run = run_experiment(cfg, worker_count());
  const CaseResult& c = run.cases.front();
  if (run.failed_solves > 0 || !c.fit) return {false, "solve or fit failed: " + c.fit_error};
  const EnvelopeCheck v = verify_eds_bound(c.profiles, *c.fit, 1.0);
  const bool ok = c.fit->mode == FitMode::UpperEnvelope && c.fit->rho <= kRhoMax && c.fit->r2 >= kR2Min &&
                  v.violations == 0 && c.profiles.size() == 15;
  return {ok, fmt("rho = %.4f", c.fit->rho) + fmt(", r2 = %.3f", c.fit->r2) +
                  ", violations = " + std::to_string(v.violations) + "/" + std::to_string(v.checked)};
}

Outcome quadrotor_contrast() {
  ExperimentConfig cfg = load_config(std::string(EDSLAB_CONFIG_DIR) + "/quadrotor_contrast.json");
  const RunResult run = run_experiment(cfg, worker_count());
  if (run.cases.size() != 2) return {false, "expected two cases"};
  const CaseResult& c1 = run.cases[0];
  const CaseResult& c2 = run.cases[1];
  if (run.failed_solves > 0 || !c1.fit || !c2.fit || !c1.certificate || !c2.certificate) {
    return {false, "a solve, fit or certificate failed"};
  }
  const DecayContrast dc = decay_contrast(*c1.fit, *c2.fit, kContrastMargin);
  const bool far = c1.far_field_max < kFarFieldRatio && c2.far_field_max >= kFarFieldRatio;
  const bool obs = c1.certificate->obs.minimum > 0.0 && c2.certificate->obs.minimum == 0.0;
  return {dc.a_decays_faster && far && obs,
          fmt("rho1 = %.3f", dc.rho_a) + fmt(", rho2 = %.3f", dc.rho_b) +
              fmt(", far field %.3f", c1.far_field_max) + fmt(" vs %.3f", c2.far_field_max) +
              fmt(", gamma_o %.3g", c1.certificate->obs.minimum) + fmt(" vs %.3g", c2.certificate->obs.minimum)};
}

Outcome ti_corollary() {
  const LQSpec spec = double_integrator_spec();
  const StageFunctions stage = lq_stage(spec);
  Vector ref(2);
  ref << 1, 1;
  SteadyState ss = solve_steady_state(stage, ref, Vector::Zero(2), Vector::Zero(1));
  const Matrix T = Matrix::Identity(2, 2);
  const TimeInvariantCosts costs = build_ti_costs(ss, Matrix::Identity(2, 2), T);
  ss.lambda_minus1 = costs.lambda_minus1;
  double worst = 0.0;
  for (int N : {5, 20, 60}) {
    const DOProblem p = make_time_invariant_problem(stage, costs, T, N, 1, 2);
    const double r =
        kkt_residual(p, steady_state_trajectory(ss, p.dims()), steady_state_data(ss, T, ref, N)).norm();
    worst = std::max(worst, r);
  }
  return {worst <= kCorollaryTol, fmt("worst KKT residual %.2e", worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path root = fs::current_path() / "acceptance_determinism";
  fs::remove_all(root);
  std::string detail;
  bool ok = true;
  for (const char* name : {"lq_chain", "scalar_oracle", "quadrotor_contrast"}) {
    for (const char* rep : {"a", "b"}) {
      const std::string cmd = std::string("\"") + EDSLAB_CLI + "\" run --config \"" + EDSLAB_CONFIG_DIR + "/" + name +
                              ".json\" --out \"" + (root / name / rep).string() + "\" > /dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, std::string("run failed for ") + name};
    }
    for (const char* f : {"base_solution.csv", "profiles.csv", "fit.csv"}) {
      const std::string a = slurp(root / name / "a" / f), b = slurp(root / name / "b" / f);
      if (a.empty() || a != b) {
        ok = false;
        detail += std::string(" ") + name + "/" + f + " differs;";
      }
    }
  }
  return {ok, ok ? "3 configs x 3 CSVs byte-identical across repeated runs" : detail};
}

}  // namespace

int main() {
  criterion("oracle_correctness", kOracleSeconds, oracle);
  criterion("dense_equivalence", kDenseSeconds, dense_equivalence);
  criterion("ublh_explicit_bound", 0.0, blh_bound);
  criterion("controllability_ulicq_uniformity", kUniformSeconds, licq_uniformity);
  criterion("observability_usosc_uniformity", kUniformSeconds, sosc_uniformity);
  criterion("duality_proposition", 0.0, duality);
  criterion("eds_certified_lq_chain", kChainSeconds, lq_chain_eds);
  criterion("quadrotor_contrast", kQuadrotorSeconds, quadrotor_contrast);
  criterion("time_invariant_corollary", 0.0, ti_corollary);
  criterion("determinism", 0.0, determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
