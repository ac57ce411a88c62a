#include <benchmark/benchmark.h>

#include "hsel/special.hpp"
#include "hsel/trunc_moments.hpp"

using namespace hsel;

namespace {

void bm_norm_logcdf(benchmark::State& state) {
  double x = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(norm_logcdf(x));
    x = x < 3 ? x + 1e-4 : -3.0;
  }
}
BENCHMARK(bm_norm_logcdf);

void bm_t_cdf(benchmark::State& state) {
  const double nu = state.range(0);
  double x = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(t_cdf_std(x, nu));
    x = x < 3 ? x + 1e-4 : -3.0;
  }
}
BENCHMARK(bm_t_cdf)->Arg(4)->Arg(30)->Arg(200);

void bm_mills(benchmark::State& state) {
  double a = -10;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mills_ratio(a));
    a = a < 10 ? a + 1e-4 : -10.0;
  }
}
BENCHMARK(bm_mills);

void bm_bvt_rect_generic(benchmark::State& state) {
  Rect2 r;
  r.x1 = {-0.5, 1.2};
  r.x2 = {-1.0, 0.7};
  Eigen::Vector2d mu(0.1, -0.2);
  BivariateScale sc{1.3, 0.55};
  for (auto _ : state) benchmark::DoNotOptimize(bvt_rect(r, mu, sc, 4.0));
}
BENCHMARK(bm_bvt_rect_generic);

void bm_tt2_single_sided(benchmark::State& state) {
  // the censored-row E-step shape: closed form, no quadrature
  Rect2 r;
  r.x2 = Interval::below(0);
  Eigen::Vector2d mu(0.9, 0.6);
  Cov2 cov = Cov2::from({1.2, 0.6}).scaled(4.0 / 6.0);
  for (auto _ : state) benchmark::DoNotOptimize(tt2_moments_cov(mu, cov, 6.0, r));
}
BENCHMARK(bm_tt2_single_sided);

void bm_tt1_half_line(benchmark::State& state) {
  UnivariateT d{0.4, 0.8, 7.0};
  Interval reg = Interval::above(0);
  for (auto _ : state) benchmark::DoNotOptimize(tt1_moments(d, reg));
}
BENCHMARK(bm_tt1_half_line);

}  // namespace
