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

#include "edslab/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "edslab/errors.hpp"
#include "edslab/svg.hpp"

namespace edslab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

const char* fit_mode_name(FitMode m) { return m == FitMode::UpperEnvelope ? "envelope" : "least_squares"; }
const char* flag(bool b) { return b ? "true" : "false"; }

void write_block(std::ostream& os, const std::string& label, int stage, const char* block, const Vector& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    os << label << ',' << stage << ',' << block << ',' << k << ',' << format_double(v[k]) << '\n';
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

}  // namespace

void write_base_solution_csv(std::ostream& os, const RunResult& run) {
  os << "case,stage,block,component,value\n";
  for (const auto& c : run.cases) {
    const auto& w = c.base.w;
    if (w.x.empty()) continue;
    write_block(os, c.label, -1, "lambda", w.lam(-1));
    for (int i = 0; i <= c.dims.N; ++i) {
      write_block(os, c.label, i, "x", w.x[static_cast<std::size_t>(i)]);
      if (i < c.dims.N) {
        write_block(os, c.label, i, "u", w.u[static_cast<std::size_t>(i)]);
        write_block(os, c.label, i, "lambda", w.lam(i));
      }
    }
  }
}

void write_profiles_csv(std::ostream& os, const RunResult& run) {
  os << "case,stage,j,replicate,s,magnitude,converged,seed\n";
  for (const auto& c : run.cases) {
    for (const auto& p : c.profiles) {
      for (int i = p.first_stage(); i <= p.last_stage(); ++i) {
        os << c.label << ',' << i << ',' << p.j << ',' << p.replicate << ',' << format_double(p.at(i)) << ','
           << format_double(p.magnitude) << ',' << flag(p.converged) << ',' << p.seed << '\n';
      }
    }
  }
}

void write_fit_csv(std::ostream& os, const RunResult& run) {
  os << "case,mode,Upsilon,rho,r2,points,clamped,no_decay,far_field_max\n";
  for (const auto& c : run.cases) {
    if (!c.fit) {
      os << c.label << ",none,,,,0,,," << format_double(c.far_field_max) << '\n';
      continue;
    }
    const DecayFit& f = *c.fit;
    os << c.label << ',' << fit_mode_name(f.mode) << ',' << format_double(f.upsilon) << ',' << format_double(f.rho)
       << ',' << format_double(f.r2) << ',' << f.points << ',' << flag(f.clamped) << ',' << flag(f.no_decay) << ','
       << format_double(c.far_field_max) << '\n';
  }
}

void write_certificates(std::ostream& os, const RunResult& run) {
  bool first = true;
  for (const auto& c : run.cases) {
    if (!first) os << '\n';
    first = false;
    if (c.certificate) {
      os << to_key_value(*c.certificate, c.label);
    } else {
      os << "case = " << c.label << '\n';
      os << "error = " << (c.base_converged ? c.certificate_error : "base solve failed: " + c.base_error) << '\n';
    }
  }
}

void write_summary(std::ostream& os, const ExperimentConfig& cfg, const RunResult& run) {
  os << "model = " << cfg.model << '\n';
  os << "cases = " << run.cases.size() << '\n';
  os << "failed_solves = " << run.failed_solves << '\n';
  for (const auto& c : run.cases) {
    os << "[" << c.label << "]\n";
    os << "base_converged = " << flag(c.base_converged) << '\n';
    if (!c.base_converged) {
      os << "base_error = " << c.base_error << '\n';
      continue;
    }
    os << "base_iterations = " << c.base.iterations << '\n';
    os << "base_residual = " << format_double(c.base.residual) << '\n';
    if (c.fit) {
      os << "rho = " << format_double(c.fit->rho) << '\n';
      os << "Upsilon = " << format_double(c.fit->upsilon) << '\n';
      os << "r2 = " << format_double(c.fit->r2) << '\n';
    } else {
      os << "fit_error = " << c.fit_error << '\n';
    }
    os << "far_field_max = " << format_double(c.far_field_max) << '\n';
  }
  // Pairwise contrast along the configured case order.
  for (std::size_t k = 0; k + 1 < run.cases.size(); ++k) {
    const auto& a = run.cases[k];
    const auto& b = run.cases[k + 1];
    if (!a.fit || !b.fit) continue;
    const DecayContrast dc = decay_contrast(*a.fit, *b.fit, cfg.contrast_margin);
    os << "rho_" << a.label << " < rho_" << b.label << ": " << flag(dc.a_decays_faster) << '\n';
  }
  os << "contrast_margin = " << format_double(cfg.contrast_margin) << '\n';
}

void write_run_outputs(const std::string& dir, const ExperimentConfig& cfg, const RunResult& run) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());

  write_file(root / "base_solution.csv", render([&](std::ostream& os) { write_base_solution_csv(os, run); }));
  write_file(root / "profiles.csv", render([&](std::ostream& os) { write_profiles_csv(os, run); }));
  write_file(root / "fit.csv", render([&](std::ostream& os) { write_fit_csv(os, run); }));
  write_file(root / "certificate.txt", render([&](std::ostream& os) { write_certificates(os, run); }));
  write_file(root / "summary.txt", render([&](std::ostream& os) { write_summary(os, cfg, run); }));

  std::vector<DecayPanel> panels;
  for (const auto& c : run.cases) {
    std::vector<SensitivityProfile> usable;
    for (const auto& p : c.profiles)
      if (p.converged) usable.push_back(p);
    if (!usable.empty()) panels.push_back({c.label, std::move(usable), c.fit});
  }
  bool plotted = false;
  if (!panels.empty()) {
    try {
      write_file(root / "decay.svg", plot_decay_panels(panels));
      plotted = true;
    } catch (const ConfigurationError&) {
      plotted = false;
    }
  }

  const bool partial = run.solver_failure() || !plotted;
  std::ostringstream manifest;
  manifest << "csv_schema_version = " << kCsvSchemaVersion << '\n';
  manifest << "status = " << (partial ? "partial" : "complete") << '\n';
  manifest << "failed_solves = " << run.failed_solves << '\n';
  for (const auto& c : run.cases) {
    manifest << "case = " << c.label << " base_converged=" << flag(c.base_converged)
             << " fit=" << flag(c.fit.has_value()) << '\n';
  }
  manifest << "files = base_solution.csv profiles.csv fit.csv certificate.txt summary.txt"
           << (plotted ? " decay.svg" : "") << '\n';
  write_file(root / "manifest.txt", manifest.str());
}

}  // namespace edslab
