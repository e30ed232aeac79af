#include <random>

#include <benchmark/benchmark.h>

#include "superres/certificate.hpp"
#include "superres/kernel.hpp"
#include "superres/model.hpp"
#include "superres/numerics.hpp"
#include "superres/recovery.hpp"
#include "superres/solver.hpp"

using namespace superres;

namespace {

PenaltyProblem reference_problem() {
  const SourceModel src({0.25, 0.63, 0.889}, {0.8, 0.5, 0.9});
  const Kernel k(0.07);
  return PenaltyProblem(synthesize(src, SampleGrid::equispaced(21), k), k, 100.0, 1e5);
}

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> N(0.0, 1.0);
  Matrix M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = N(rng);
  return M;
}

void BM_KernelDerivatives(benchmark::State& state) {
  const Kernel k(0.07);
  double t = -0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(k.phi(t) + k.d1(t) + k.d2(t) + k.d3(t));
    t = t > 0.5 ? -0.5 : t + 1e-3;
  }
}
BENCHMARK(BM_KernelDerivatives);

void BM_SupQ(benchmark::State& state) {
  const auto p = reference_problem();
  const auto s = solve(p, 0.25, 500, false);
  const Certificate c = p.certificate(s.best);
  for (auto _ : state) benchmark::DoNotOptimize(sup_q(c, p.scanner()));
}
BENCHMARK(BM_SupQ);

void BM_GlobalMaximizers(benchmark::State& state) {
  const auto p = reference_problem();
  const auto s = solve(p, 0.25, 500, false);
  const Certificate c = p.certificate(s.best);
  for (auto _ : state) benchmark::DoNotOptimize(global_maximizers(c, p.scanner(), {}));
}
BENCHMARK(BM_GlobalMaximizers);

void BM_QpProject(benchmark::State& state) {
  const auto rows = state.range(0);
  std::mt19937_64 rng(3);
  const Matrix A = random_matrix(rng, rows, 21);
  const Vector b = Vector::Constant(rows, 1.0);
  const Vector p = 10.0 * Vector::Ones(21);
  for (auto _ : state) benchmark::DoNotOptimize(numerics::qp_project(p, A, b, 100.0));
}
BENCHMARK(BM_QpProject)->Arg(10)->Arg(50)->Arg(200);

void BM_LpMin(benchmark::State& state) {
  const auto rows = state.range(0);
  std::mt19937_64 rng(5);
  const Matrix G = random_matrix(rng, rows, 21);
  const Vector c = random_matrix(rng, rows, 1).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(numerics::lp_min(G, c, 100.0));
}
BENCHMARK(BM_LpMin)->Arg(10)->Arg(50)->Arg(200);

void BM_Solve(benchmark::State& state) {
  const auto p = reference_problem();
  const int iters = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve(p, 0.25, iters, false));
  state.SetItemsProcessed(state.iterations() * iters);
}
BENCHMARK(BM_Solve)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_RecoverAmplitudes(benchmark::State& state) {
  const auto g = SampleGrid::equispaced(21);
  const Kernel k(0.07);
  const SourceModel src({0.25, 0.63, 0.889}, {0.8, 0.5, 0.9});
  const auto meas = synthesize(src, g, k);
  Vector t(3);
  t << 0.25, 0.63, 0.889;
  for (auto _ : state) benchmark::DoNotOptimize(recover_amplitudes(g, k, t, meas.y));
}
BENCHMARK(BM_RecoverAmplitudes);

}  // namespace

BENCHMARK_MAIN();
