#include <benchmark/benchmark.h>

#include "sgpde/gauss_newton.hpp"
#include "sgpde/woodbury.hpp"

#include <random>

using namespace sgpde;

namespace {

double unit(std::mt19937_64& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

Mat random_dense(int r, int c, std::mt19937_64& eng) {
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = 2.0 * unit(eng) - 1.0;
  return m;
}

LowRankInverse make_lri(int rank, int n, double gamma, std::mt19937_64& eng) {
  const Mat w = random_dense(rank, rank, eng);
  CholeskyFactor lf;
  lf.lower = Mat(Mat(Mat::Identity(rank, rank) + w * w.transpose() / rank).llt().matrixL());
  const Mat cross = random_dense(rank, n, eng) / std::sqrt(static_cast<double>(n));
  return LowRankInverse::factorize(lf, cross, gamma);
}

}  // namespace

static void BM_WoodburyApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int rank = n / 2;
  std::mt19937_64 eng(1);
  const LowRankInverse lri = make_lri(rank, n, 1e-6, eng);
  const Vec v = random_dense(n, 1, eng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lri.apply_inverse(v));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_WoodburyApply)->Arg(500)->Arg(1000)->Arg(2000)->Arg(4000)->Complexity();

static void BM_DenseSolveOracle(benchmark::State& state) {
  // dense counterpart of the factorized apply, for scaling comparison
  const int n = static_cast<int>(state.range(0));
  const int rank = n / 2;
  std::mt19937_64 eng(1);
  const Mat w = random_dense(rank, rank, eng);
  const Mat theta = Mat::Identity(rank, rank) + w * w.transpose() / rank;
  const Mat cross = random_dense(rank, n, eng) / std::sqrt(static_cast<double>(n));
  Mat sigma = cross.transpose() * theta.llt().solve(cross);
  sigma.diagonal().array() += 1e-6;
  const Vec v = random_dense(n, 1, eng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Vec(sigma.llt().solve(v)));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_DenseSolveOracle)->Arg(500)->Arg(1000)->Arg(2000)->Complexity();

static void BM_GramAssembly(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const BuiltProblem bp = elliptic_problem(n, n / 2, 0.75, 0.2, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_cross(bp.spec.kernel, bp.phi, bp.psi));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_GramAssembly)->Arg(200)->Arg(400)->Arg(800)->Complexity();

static void BM_GaussNewtonStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const BuiltProblem bp = elliptic_problem(n, n / 2, 0.75, 0.2, 7);
  const Mat theta = assemble_theta(bp.spec.kernel, bp.phi);
  const Mat cross = assemble_cross(bp.spec.kernel, bp.phi, bp.psi);
  const NuggetSpec nugget = build_nugget(theta, bp.phi.layout, 1e-12);
  const CholeskyFactor lf = cholesky_theta(theta, nugget);
  const LowRankInverse lri = LowRankInverse::factorize(lf, cross, 1e-12);
  const GnProblem p = make_gn_problem(bp.elim, lri);
  GNConfig cfg;
  cfg.max_iter = 1;
  const Vec w0 = Vec::Zero(p.free_dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gn_solve(p, cfg, w0));
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_GaussNewtonStep)->Arg(300)->Arg(600)->Arg(1200)->Unit(benchmark::kMillisecond)->Complexity();

BENCHMARK_MAIN();
