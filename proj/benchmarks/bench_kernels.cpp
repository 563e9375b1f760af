// Microbenchmarks for the numerical kernels on benchmark-scenario shapes.

#include <benchmark/benchmark.h>

#include "sfpca/deflation.hpp"
#include "sfpca/man_sfpca.hpp"
#include "sfpca/manifold.hpp"
#include "sfpca/rank1.hpp"
#include "sfpca/simbench.hpp"
#include "sfpca/subsolvers.hpp"

namespace {

using sfpca::DenseMatrix;
using sfpca::Vector;

DenseMatrix random_matrix(int n, int p, std::uint64_t seed) {
  sfpca::NormalSampler rng(seed);
  return rng.gaussian_matrix(n, p);
}

void bm_soft_threshold(benchmark::State& state) {
  const DenseMatrix z = random_matrix(250, 100, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sfpca::soft_threshold(z, 0.3));
  }
}
BENCHMARK(bm_soft_threshold);

void bm_thin_svd(benchmark::State& state) {
  const DenseMatrix x = random_matrix(250, 100, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sfpca::thin_svd(x));
  }
}
BENCHMARK(bm_thin_svd);

void bm_retraction(benchmark::State& state) {
  const DenseMatrix x = random_matrix(250, 3, 3);
  auto s = sfpca::SmoothingOperator::build(sfpca::build_difference_penalty(250, 2), 3.0);
  sfpca::StiefelPoint base = sfpca::StiefelPoint::make(
      sfpca::retract(sfpca::StiefelPoint::make(DenseMatrix::Zero(250, 3), s, false), x).u,
      s);
  const DenseMatrix step = 0.01 * random_matrix(250, 3, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sfpca::retract(base, step));
  }
}
BENCHMARK(bm_retraction);

void bm_procrustes(benchmark::State& state) {
  auto s = sfpca::SmoothingOperator::build(sfpca::build_difference_penalty(250, 2), 3.0);
  sfpca::ProcrustesProblem prob;
  prob.s = s;
  prob.a = random_matrix(250, 3, 5);
  prob.b = random_matrix(250, 3, 6);
  prob.rho = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sfpca::solve_procrustes(prob));
  }
}
BENCHMARK(bm_procrustes);

void bm_madmm_subproblem(benchmark::State& state) {
  const DenseMatrix x = random_matrix(250, 100, 7);
  const DenseMatrix v = sfpca::init_leading_svd(x, 3).second;
  auto s = sfpca::SmoothingOperator::build(sfpca::build_difference_penalty(250, 2), 3.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sfpca::subproblem_madmm(x, v, s, 1.0, 1.0, 1e-7, 1000, std::nullopt));
  }
}
BENCHMARK(bm_madmm_subproblem);

void bm_rank1_fit(benchmark::State& state) {
  const DenseMatrix x = random_matrix(250, 100, 8);
  sfpca::Rank1Config cfg;
  cfg.lambda_u = 1.0;
  cfg.lambda_v = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sfpca::fit_rank1(x, cfg));
  }
}
BENCHMARK(bm_rank1_fit);

void bm_deflate_block(benchmark::State& state) {
  const DenseMatrix x = random_matrix(250, 100, 9);
  const auto [u, v] = sfpca::init_leading_svd(x, 3);
  const sfpca::DeflationState base = sfpca::DeflationState::init(x);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sfpca::deflate_block(
        base, u, v, sfpca::DeflationScheme{sfpca::SchemeKind::projection, true}));
  }
}
BENCHMARK(bm_deflate_block);

}  // namespace

BENCHMARK_MAIN();
