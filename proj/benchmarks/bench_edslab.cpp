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

#include <benchmark/benchmark.h>

#include "edslab/certify.hpp"
#include "edslab/eds.hpp"
#include "edslab/kkt.hpp"
#include "edslab/models.hpp"

namespace {

using namespace edslab;

void BM_SolveLQChain(benchmark::State& state) {
  const ModelInstance m = lq_chain(4, 2, static_cast<int>(state.range(0)), 0.9, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_equality_nlp(m.problem, m.base_data, m.warm_start));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveLQChain)->RangeMultiplier(2)->Range(10, 80)->Unit(benchmark::kMillisecond)->Complexity();

void BM_SolveQuadrotorPerturbed(benchmark::State& state) {
  QuadrotorParams p;
  p.dt = 0.3;
  p.N = static_cast<int>(state.range(0));
  const ModelInstance m = quadrotor_problem(p);
  const SolveResult base = solve_equality_nlp(m.problem, m.base_data, m.warm_start);
  const PerturbationSpec spec = make_perturbation(m.problem.dims(), p.N / 2, 0.1, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_perturbation_experiment(m.problem, m.base_data, base.w, spec));
  }
}
BENCHMARK(BM_SolveQuadrotorPerturbed)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_Linearize(benchmark::State& state) {
  QuadrotorParams p;
  p.N = static_cast<int>(state.range(0));
  const ModelInstance m = quadrotor_problem(p);
  for (auto _ : state) benchmark::DoNotOptimize(linearize(m.problem, m.warm_start, m.base_data));
}
BENCHMARK(BM_Linearize)->Arg(20)->Arg(60)->Unit(benchmark::kMicrosecond);

void BM_CertificateReport(benchmark::State& state) {
  QuadrotorParams p;
  p.N = static_cast<int>(state.range(0));
  const ModelInstance m = quadrotor_problem(p);
  const StageBlocks blocks = linearize(m.problem, m.warm_start, m.base_data);
  for (auto _ : state) benchmark::DoNotOptimize(build_report(blocks));
}
BENCHMARK(BM_CertificateReport)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_Factorization(benchmark::State& state) {
  QuadrotorParams p;
  p.N = static_cast<int>(state.range(0));
  const ModelInstance m = quadrotor_problem(p);
  const KKTSystem s = assemble_kkt_system(m.problem, m.warm_start, m.base_data);
  const auto nz = s.H.rows(), nc = s.J.rows();
  Matrix K = Matrix::Zero(nz + nc, nz + nc);
  K.topLeftCorner(nz, nz) = s.H;
  K.bottomLeftCorner(nc, nz) = s.J;
  K.topRightCorner(nz, nc) = s.J.transpose();
  for (auto _ : state) benchmark::DoNotOptimize(SymmetricIndefiniteFactorization(K));
}
BENCHMARK(BM_Factorization)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
