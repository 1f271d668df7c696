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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "edslab/errors.hpp"
#include "edslab/experiment.hpp"
#include "edslab/report.hpp"
#include "edslab/svg.hpp"

using namespace edslab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("edslab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

int cli(const std::string& args, const fs::path& stdout_file = "/dev/null") {
  const std::string cmd = std::string("\"") + EDSLAB_CLI + "\" " + args + " > \"" + stdout_file.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config(const std::string& name) { return std::string(EDSLAB_CONFIG_DIR) + "/" + name; }

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

SensitivityProfile synthetic(int N, int j, double upsilon, double rho) {
  SensitivityProfile p;
  p.j = j;
  p.magnitude = 1.0;
  for (int i = -1; i <= N; ++i) p.s.push_back(upsilon * std::pow(rho, std::abs(i - j)));
  return p;
}

}  // namespace

// --- Config parsing -----------------------------------------------------------

TEST(Config, ParsesEveryKey) {
  const ExperimentConfig c = parse_config(R"({
    "model": {"name": "quadrotor", "params": {"q": 0.5, "dt": 0.2}},
    "horizon": 30,
    "perturbation": {"stages": [-1, 15], "replicates": 4, "magnitude": 0.05, "primal_only": true},
    "seed": 18446744073709551615,
    "solver": {"tol_kkt": 1e-10, "max_iter": 50, "reg0": 1e-9, "reg_max": 1e-3, "ls_beta": 0.6, "ls_sigma": 1e-3},
    "certificate": {"window_ctrl": 2, "window_obs": 3},
    "analysis": {"far_field_distance": 10, "contrast_margin": 0.1},
    "output_dir": "somewhere",
    "cases": [{"label": "a", "params": {"b": 0}}, {"label": "b"}]
  })");
  EXPECT_EQ(c.model, "quadrotor");
  EXPECT_EQ(c.params.at("q"), 0.5);
  EXPECT_EQ(c.horizon, 30);
  EXPECT_EQ(c.stages, (std::vector<int>{-1, 15}));
  EXPECT_EQ(c.replicates, 4);
  EXPECT_EQ(c.magnitude, 0.05);
  EXPECT_TRUE(c.primal_only);
  EXPECT_EQ(c.seed, 18446744073709551615ull);
  EXPECT_EQ(c.solver.max_iter, 50);
  EXPECT_EQ(c.solver.ls_beta, 0.6);
  EXPECT_EQ(c.window_ctrl, 2);
  EXPECT_EQ(c.window_obs, 3);
  EXPECT_EQ(c.far_field_distance, 10);
  EXPECT_EQ(c.contrast_margin, 0.1);
  EXPECT_EQ(c.output_dir, "somewhere");
  ASSERT_EQ(c.cases.size(), 2u);
  EXPECT_NO_THROW(c.validate());
  const auto eff = c.effective_cases();
  EXPECT_EQ(eff[0].params.at("b"), 0.0);
  EXPECT_EQ(eff[0].params.at("q"), 0.5);
  EXPECT_EQ(eff[1].params.count("b"), 0u);
}

TEST(Config, DefaultsToSingleBaseCase) {
  const ExperimentConfig c = parse_config(R"({"model": "double_integrator"})");
  ASSERT_EQ(c.effective_cases().size(), 1u);
  EXPECT_EQ(c.effective_cases()[0].label, "base");
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse_config("{"), ConfigurationError);
  EXPECT_THROW(parse_config(R"({"horizon": 5})"), ConfigurationError);
  EXPECT_THROW(parse_config(R"({"model": "lq_chain", "colour": 1})"), ConfigurationError);
  EXPECT_THROW(parse_config(R"({"model": "lq_chain", "seed": -4})"), ConfigurationError);
  EXPECT_THROW(parse_config(R"({"model": "lq_chain", "perturbation": {"stages": "all"}})"), ConfigurationError);
  EXPECT_THROW(parse_config(R"({"model": {"params": {}}})"), ConfigurationError);
  EXPECT_THROW(load_config("/nonexistent/edslab.json"), ConfigurationError);
}

TEST(Config, ValidationCatchesBadValues) {
  auto invalid = [](const std::string& text) {
    EXPECT_THROW(parse_config(text).validate(), ConfigurationError) << text;
  };
  invalid(R"({"model": "helicopter"})");
  invalid(R"({"model": "scalar_oracle", "perturbation": {"stages": [2]}})");
  invalid(R"({"model": "scalar_oracle", "perturbation": {"stages": [-2]}})");
  invalid(R"({"model": "scalar_oracle", "perturbation": {"replicates": 0}})");
  invalid(R"({"model": "scalar_oracle", "perturbation": {"magnitude": 0}})");
  invalid(R"({"model": {"name": "quadrotor", "params": {"mass": 2}}})");
  invalid(R"({"model": "lq_chain", "solver": {"ls_beta": 2}})");
  invalid(R"({"model": "lq_chain", "cases": [{"label": "x"}, {"label": "x"}]})");
}

TEST(Models, PresetsAndBuilder) {
  std::set<std::string> names;
  for (const auto& p : model_presets()) names.insert(p.name);
  EXPECT_EQ(names, (std::set<std::string>{"quadrotor", "lq_chain", "double_integrator", "scalar_oracle"}));
  EXPECT_EQ(build_model("quadrotor", {}, 0).problem.dims().N, 60);
  EXPECT_EQ(build_model("lq_chain", {{"nx", 3}, {"nu", 1}}, 12).problem.dims().nx, 3);
  EXPECT_THROW(build_model("lq_chain", {{"nx", 2.5}}, 12), ConfigurationError);
  EXPECT_THROW(build_model("nope", {}, 0), ConfigurationError);
}

TEST(Seeds, DistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (int c = 0; c < 3; ++c)
    for (int s = 0; s < 4; ++s)
      for (int r = 0; r < 5; ++r) seen.insert(derive_seed(7, c, s, r));
  EXPECT_EQ(seen.size(), 60u);
  EXPECT_EQ(derive_seed(7, 1, 2, 3), derive_seed(7, 1, 2, 3));
  EXPECT_NE(derive_seed(7, 1, 2, 3), derive_seed(8, 1, 2, 3));
}

TEST(Threads, EnvironmentCap) {
  ::setenv("EDSLAB_THREADS", "1", 1);
  EXPECT_EQ(worker_count(), 1);
  ::setenv("EDSLAB_THREADS", "3", 1);
  EXPECT_GE(worker_count(), 1);
  EXPECT_LE(worker_count(), 3);
  ::setenv("EDSLAB_THREADS", "junk", 1);
  EXPECT_GE(worker_count(), 1);
  ::unsetenv("EDSLAB_THREADS");
  EXPECT_GE(worker_count(), 1);
}

TEST(Runner, ResultsIndependentOfThreadCount) {
  ExperimentConfig cfg = parse_config(R"({
    "model": {"name": "lq_chain", "params": {"nx": 3, "nu": 1, "spectral_radius": 0.8, "seed": 2}},
    "horizon": 20, "perturbation": {"stages": [3, 10, 17], "replicates": 3}, "seed": 9})");
  const RunResult a = run_experiment(cfg, 1), b = run_experiment(cfg, 4);
  std::ostringstream pa, pb, fa, fb;
  write_profiles_csv(pa, a);
  write_profiles_csv(pb, b);
  write_fit_csv(fa, a);
  write_fit_csv(fb, b);
  EXPECT_EQ(pa.str(), pb.str());
  EXPECT_EQ(fa.str(), fb.str());
  EXPECT_EQ(a.failed_solves, 0);
}

// --- Command line -------------------------------------------------------------

TEST(Cli, MissingModelExitsThreeWithoutOutputs) {
  const fs::path dir = scratch("missing_model");
  spit(dir / "bad.json", R"({"horizon": 10, "output_dir": ")" + (dir / "out").string() + "\"}");
  EXPECT_EQ(cli("run --config " + (dir / "bad.json").string()), 3);
  EXPECT_FALSE(fs::exists(dir / "out"));
  EXPECT_EQ(cli("run --config " + (dir / "absent.json").string() + " --out " + (dir / "out").string()), 3);
  EXPECT_FALSE(fs::exists(dir / "out"));
  EXPECT_EQ(cli("run"), 3);
  EXPECT_EQ(cli("frobnicate"), 3);
}

TEST(Cli, ScalarOracleBaseSolution) {
  const fs::path dir = scratch("scalar");
  ASSERT_EQ(cli("run --config " + config("scalar_oracle.json") + " --out " + (dir / "out").string()), 0);
  std::map<std::string, double> got;
  const auto rows = read_csv(dir / "out" / "base_solution.csv");
  for (std::size_t k = 1; k < rows.size(); ++k) got[rows[k][1] + ":" + rows[k][2]] = std::stod(rows[k][4]);
  EXPECT_NEAR(got.at("0:x"), 1.0, 1e-8);
  EXPECT_NEAR(got.at("0:u"), -0.5, 1e-8);
  EXPECT_NEAR(got.at("1:x"), 0.5, 1e-8);
  EXPECT_NEAR(got.at("-1:lambda"), 3.0, 1e-8);
  EXPECT_NEAR(got.at("0:lambda"), 1.0, 1e-8);
  for (const char* f : {"base_solution.csv", "profiles.csv", "fit.csv", "certificate.txt", "summary.txt",
                        "decay.svg", "manifest.txt"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  }
  EXPECT_NE(slurp(dir / "out" / "manifest.txt").find("status = complete"), std::string::npos);
}

TEST(Cli, GoldenCsvHeaders) {
  const fs::path dir = scratch("golden");
  ASSERT_EQ(cli("run --config " + config("scalar_oracle.json") + " --out " + (dir / "out").string()), 0);
  for (const char* name : {"base_solution", "profiles", "fit"}) {
    const std::string golden = first_line(fs::path(EDSLAB_GOLDEN_DIR) / (std::string(name) + ".header"));
    EXPECT_EQ(first_line(dir / "out" / (std::string(name) + ".csv")), golden) << name;
  }
  EXPECT_NE(slurp(dir / "out" / "manifest.txt").find("csv_schema_version = " + std::to_string(kCsvSchemaVersion)),
            std::string::npos);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const fs::path dir = scratch("determinism");
  const std::string cfg = config("lq_chain.json");
  ASSERT_EQ(cli("run --config " + cfg + " --out " + (dir / "a").string()), 0);
  ::setenv("EDSLAB_THREADS", "2", 1);
  ASSERT_EQ(cli("run --config " + cfg + " --out " + (dir / "b").string()), 0);
  ::unsetenv("EDSLAB_THREADS");
  for (const char* f : {"base_solution.csv", "profiles.csv", "fit.csv", "certificate.txt", "decay.svg"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  ASSERT_EQ(cli("run --config " + cfg + " --out " + (dir / "c").string() + " --seed 12"), 0);
  EXPECT_NE(slurp(dir / "a" / "profiles.csv"), slurp(dir / "c" / "profiles.csv"));
}

TEST(Cli, SolverFailureExitsTwo) {
  const fs::path dir = scratch("solver_failure");
  spit(dir / "cfg.json", R"({"model": "lq_chain", "horizon": 10, "solver": {"tol_kkt": 1e-300, "max_iter": 1}})");
  EXPECT_EQ(cli("run --config " + (dir / "cfg.json").string() + " --out " + (dir / "out").string()), 2);
  EXPECT_NE(slurp(dir / "out" / "manifest.txt").find("status = partial"), std::string::npos);
}

TEST(Cli, QuadrotorCasePair) {
  const fs::path dir = scratch("quadrotor");
  ASSERT_EQ(cli("run --config " + config("quadrotor_contrast.json") + " --out " + (dir / "out").string(),
                dir / "stdout.txt"),
            0);
  const auto rows = read_csv(dir / "out" / "fit.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][0], "case1");
  EXPECT_EQ(rows[2][0], "case2");
  EXPECT_NE(slurp(dir / "stdout.txt").find("rho_case1 < rho_case2: true"), std::string::npos);
  EXPECT_NE(slurp(dir / "out" / "summary.txt").find("rho_case1 < rho_case2: true"), std::string::npos);
}

TEST(Cli, CertifyAndModels) {
  const fs::path dir = scratch("certify");
  ASSERT_EQ(cli("certify --config " + config("scalar_oracle.json"), dir / "cert.txt"), 0);
  const std::string cert = slurp(dir / "cert.txt");
  EXPECT_NE(cert.find("beta = "), std::string::npos);
  EXPECT_NE(cert.find("gamma_o = "), std::string::npos);
  ASSERT_EQ(cli("models", dir / "models.txt"), 0);
  const std::string models = slurp(dir / "models.txt");
  for (const char* name : {"quadrotor", "lq_chain", "double_integrator", "scalar_oracle"}) {
    EXPECT_NE(models.find(name), std::string::npos) << name;
  }
}

// --- SVG ----------------------------------------------------------------------

TEST(Svg, EmptyInputIsAnError) {
  EXPECT_THROW(plot_decay(std::vector<SensitivityProfile>{}, std::nullopt), ConfigurationError);
  EXPECT_THROW(plot_decay_panels(std::vector<DecayPanel>{}), ConfigurationError);
}

TEST(Svg, DeterministicAndPrimitiveOnly) {
  const std::vector<SensitivityProfile> ps{synthetic(30, 10, 1.0, 0.7), synthetic(30, 20, 1.0, 0.7)};
  const DecayFit fit = fit_decay_envelope(ps);
  const std::string a = plot_decay(ps, fit, "demo"), b = plot_decay(ps, fit, "demo");
  EXPECT_EQ(a, b);
  const std::regex tag("<([a-zA-Z?/][a-zA-Z]*)");
  std::set<std::string> tags;
  for (auto it = std::sregex_iterator(a.begin(), a.end(), tag); it != std::sregex_iterator(); ++it) {
    tags.insert((*it)[1]);
  }
  EXPECT_EQ(tags, (std::set<std::string>{"?xml", "svg", "/svg", "line", "circle", "text", "/text"}));
  // One dashed marker per perturbed stage.
  std::size_t dashed = 0;
  for (std::size_t pos = a.find("stroke-dasharray"); pos != std::string::npos; pos = a.find("stroke-dasharray", pos + 1))
    ++dashed;
  EXPECT_EQ(dashed, 2u);
}

TEST(Svg, ExactEnvelopePointsSitOnTheEnvelope) {
  const std::vector<SensitivityProfile> ps{synthetic(20, 8, 0.5, 0.6)};
  DecayFit fit;
  fit.upsilon = 0.5;
  fit.rho = 0.6;
  const std::string svg = plot_decay(ps, fit);
  std::set<std::pair<std::string, std::string>> ends;
  const std::regex seg(
      "<line x1=\"([-0-9.]+)\" y1=\"([-0-9.]+)\" x2=\"([-0-9.]+)\" y2=\"([-0-9.]+)\" stroke=\"#000000\" "
      "stroke-width=\"1.200\"/>");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), seg); it != std::sregex_iterator(); ++it) {
    ends.insert({(*it)[1], (*it)[2]});
    ends.insert({(*it)[3], (*it)[4]});
  }
  const std::regex dot("<circle cx=\"([-0-9.]+)\" cy=\"([-0-9.]+)\"");
  int circles = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), dot); it != std::sregex_iterator(); ++it) {
    ++circles;
    EXPECT_TRUE(ends.count({(*it)[1], (*it)[2]})) << (*it)[0];
  }
  EXPECT_EQ(circles, 22);
}
