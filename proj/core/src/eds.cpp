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

#include "edslab/eds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "edslab/errors.hpp"

namespace edslab {

Vector random_direction(int dim, std::uint64_t seed) {
  if (dim < 0) throw ConfigurationError("negative dimension");
  Vector v(dim);
  if (dim == 0) return v;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  do {
    for (int k = 0; k < dim; ++k) v[k] = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

PerturbationSpec make_perturbation(const Dimensions& dims, int stage, double magnitude, std::uint64_t seed) {
  if (stage < -1 || stage > dims.N) throw ConfigurationError("perturbation stage out of range");
  if (!(magnitude >= 0.0)) throw ConfigurationError("perturbation magnitude must be nonnegative");
  return {stage, magnitude * random_direction(dims.data_dim(stage), seed)};
}

std::vector<double> stage_deviations(const PrimalDualTrajectory& a, const PrimalDualTrajectory& b,
                                     bool primal_only) {
  const int N = static_cast<int>(a.u.size());
  std::vector<double> s(static_cast<std::size_t>(N + 2), 0.0);
  for (int i = -1; i <= N; ++i) {
    double sq = 0.0;
    if (i >= 0) sq += (a.x[static_cast<std::size_t>(i)] - b.x[static_cast<std::size_t>(i)]).squaredNorm();
    if (i >= 0 && i < N) sq += (a.u[static_cast<std::size_t>(i)] - b.u[static_cast<std::size_t>(i)]).squaredNorm();
    if (!primal_only && i < N) sq += (a.lam(i) - b.lam(i)).squaredNorm();
    s[static_cast<std::size_t>(i + 1)] = std::sqrt(sq);
  }
  return s;
}

SensitivityProfile run_perturbation_experiment(const DOProblem& p, const DataTrajectory& d_star,
                                               const PrimalDualTrajectory& w_star, const PerturbationSpec& spec,
                                               const ExperimentOptions& opts) {
  const auto& dims = p.dims();
  if (spec.stage < -1 || spec.stage > dims.N) throw ConfigurationError("perturbation stage out of range");
  if (spec.delta.size() != dims.data_dim(spec.stage)) throw ConfigurationError("perturbation has wrong size");

  DataTrajectory d = d_star;
  d.at(spec.stage) += spec.delta;

  SensitivityProfile profile;
  profile.j = spec.stage;
  profile.magnitude = spec.magnitude();
  try {
    const SolveResult sol = solve_equality_nlp(p, d, w_star, opts.solver);
    profile.s = stage_deviations(sol.w, w_star, opts.primal_only);
  } catch (const NonconvergenceError& e) {
    profile.converged = false;
    profile.s = stage_deviations(e.last_iterate(), w_star, opts.primal_only);
  } catch (const RegularityError&) {
    profile.converged = false;
    profile.s.assign(static_cast<std::size_t>(dims.N + 2), 0.0);
  } catch (const EvaluationError&) {
    profile.converged = false;
    profile.s.assign(static_cast<std::size_t>(dims.N + 2), 0.0);
  }
  for (double& v : profile.s) {
    if (!std::isfinite(v)) {
      v = 0.0;
      profile.converged = false;
    }
  }
  return profile;
}

double profile_floor(const SensitivityProfile& profile, double floor_abs, double floor_rel) {
  const double peak = profile.s.empty() ? 0.0 : *std::max_element(profile.s.begin(), profile.s.end());
  return std::max(floor_abs, floor_rel * peak);
}

namespace {

struct Point {
  double distance;
  double log_value;
};

std::vector<Point> collect(std::span<const SensitivityProfile> profiles, const FitOptions& opts) {
  std::vector<Point> pts;
  for (const auto& prof : profiles) {
    if (!prof.converged || !(prof.magnitude > 0.0)) continue;
    const double floor = profile_floor(prof, opts.floor_abs, opts.floor_rel);
    for (int i = prof.first_stage(); i <= prof.last_stage(); ++i) {
      const double v = prof.at(i);
      if (v > floor) pts.push_back({static_cast<double>(std::abs(i - prof.j)), std::log(v / prof.magnitude)});
    }
  }
  return pts;
}

}  // namespace

DecayFit fit_decay(std::span<const SensitivityProfile> profiles, const FitOptions& opts) {
  const auto pts = collect(profiles, opts);
  if (pts.size() < 3) throw ConfigurationError("fewer than three profile entries above the floor");

  const double n = static_cast<double>(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& pt : pts) {
    mx += pt.distance;
    my += pt.log_value;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& pt : pts) {
    sxx += (pt.distance - mx) * (pt.distance - mx);
    sxy += (pt.distance - mx) * (pt.log_value - my);
    syy += (pt.log_value - my) * (pt.log_value - my);
  }
  if (sxx == 0.0) throw ConfigurationError("all profile entries lie at the same distance");

  DecayFit fit;
  fit.mode = FitMode::LeastSquares;
  fit.floor_abs = opts.floor_abs;
  fit.floor_rel = opts.floor_rel;
  fit.points = static_cast<int>(pts.size());

  double slope = sxy / sxx;
  if (slope > 0.0) {
    fit.clamped = true;
    slope = 0.0;
  }
  const double intercept = my - slope * mx;
  fit.rho = std::exp(slope);
  fit.upsilon = std::exp(intercept);
  fit.no_decay = fit.rho >= 1.0 - 1e-12;

  double ss_res = 0.0;
  for (const auto& pt : pts) {
    const double e = pt.log_value - (intercept + slope * pt.distance);
    ss_res += e * e;
  }
  if (syy <= 1e-24 * n) {
    fit.r2 = ss_res <= 1e-20 * n ? 1.0 : 0.0;
  } else {
    fit.r2 = 1.0 - ss_res / syy;
  }
  return fit;
}

DecayFit fit_decay_envelope(std::span<const SensitivityProfile> profiles, const FitOptions& opts) {
  DecayFit fit = fit_decay(profiles, opts);
  fit.mode = FitMode::UpperEnvelope;
  const double log_rho = std::log(fit.rho);
  double log_upsilon = -std::numeric_limits<double>::infinity();
  for (const auto& pt : collect(profiles, opts)) {
    log_upsilon = std::max(log_upsilon, pt.log_value - pt.distance * log_rho);
  }
  fit.upsilon = std::exp(log_upsilon);
  return fit;
}

EnvelopeCheck verify_eds_bound(std::span<const SensitivityProfile> profiles, const DecayFit& fit, double slack) {
  EnvelopeCheck out;
  for (const auto& prof : profiles) {
    if (!prof.converged) continue;
    const double floor = profile_floor(prof, fit.floor_abs, fit.floor_rel);
    for (int i = prof.first_stage(); i <= prof.last_stage(); ++i) {
      const double v = prof.at(i);
      if (!(v > floor)) continue;
      const double envelope = fit.upsilon * std::pow(fit.rho, std::abs(i - prof.j)) * prof.magnitude;
      const double ratio = envelope > 0.0 ? v / envelope : std::numeric_limits<double>::infinity();
      ++out.checked;
      out.worst_ratio = std::max(out.worst_ratio, ratio);
      if (ratio > slack * (1.0 + 1e-12)) ++out.violations;
    }
  }
  return out;
}

DecayContrast decay_contrast(const DecayFit& a, const DecayFit& b, double margin) {
  return {a.rho, b.rho, a.rho + margin < b.rho};
}

double far_field_ratio(const SensitivityProfile& profile, int distance) {
  const double peak = profile.s.empty() ? 0.0 : *std::max_element(profile.s.begin(), profile.s.end());
  if (!(peak > 0.0)) return 0.0;
  double worst = 0.0;
  for (int i = profile.first_stage(); i <= profile.last_stage(); ++i) {
    if (std::abs(i - profile.j) >= distance) worst = std::max(worst, profile.at(i) / peak);
  }
  return worst;
}

}  // namespace edslab
