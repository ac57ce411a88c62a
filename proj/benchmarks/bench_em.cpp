#include <benchmark/benchmark.h>

#include "hsel/em.hpp"
#include "hsel/simgen.hpp"

using namespace hsel;

namespace {

Dataset bench_data(DgpFamily family, long n) {
  DgpConfig cfg;
  cfg.family = family;
  cfg.nu = 4;
  cfg.n = n;
  cfg.seed = 99;
  return generate(cfg);
}

void bm_loglik_slt(benchmark::State& state) {
  Dataset d = bench_data(DgpFamily::t, state.range(0));
  SlParams p;
  p.beta = Eigen::Vector2d(1.0, 0.5);
  p.gamma = Eigen::Vector3d(0.74, 0.3, -0.5);
  p.sigma2 = 1;
  p.rho = 0.6;
  p.nu = 4;
  for (auto _ : state) benchmark::DoNotOptimize(loglik_slt(p, d));
}
BENCHMARK(bm_loglik_slt)->Arg(500)->Arg(1000);

void bm_estep_slt(benchmark::State& state) {
  Dataset d = bench_data(DgpFamily::t, state.range(0));
  SlParams p;
  p.beta = Eigen::Vector2d(1.0, 0.5);
  p.gamma = Eigen::Vector3d(0.74, 0.3, -0.5);
  p.sigma2 = 1;
  p.rho = 0.6;
  p.nu = 4;
  for (auto _ : state) benchmark::DoNotOptimize(estep_slt(p, d, 1));
}
BENCHMARK(bm_estep_slt)->Arg(500)->Arg(1000);

void bm_fit_sln(benchmark::State& state) {
  Dataset d = bench_data(DgpFamily::normal, 500);
  FitOptions fo;
  fo.family = Family::normal;
  fo.compute_se = false;
  for (auto _ : state) benchmark::DoNotOptimize(fit(d, fo));
}
BENCHMARK(bm_fit_sln)->Unit(benchmark::kMillisecond);

void bm_fit_slt(benchmark::State& state) {
  Dataset d = bench_data(DgpFamily::t, 500);
  FitOptions fo;
  fo.family = Family::t;
  fo.nu_mode = NuMode::estimate;
  fo.compute_se = false;
  for (auto _ : state) benchmark::DoNotOptimize(fit(d, fo));
}
BENCHMARK(bm_fit_slt)->Unit(benchmark::kMillisecond);

}  // namespace
