#include "hsel/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hsel/parallel.hpp"
#include "hsel/special.hpp"

namespace hsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ln S_i with S_i = P(Y2 <= 0 | row i): conditional on the observed outcome on
// selected rows, marginal on censored rows.
double log_survival(const SlParams& params, const Dataset& data, long i) {
  if (data.selected(i)) {
    double v = data.outcome(i);
    if (params.normal()) {
      CondNormal cn = conditional_normal(params, data.x().row(i), data.w().row(i), v);
      return norm_logcdf(-cn.mu_c / std::sqrt(cn.sigma2_c));
    }
    CondT ct = conditional_t(params, data.x().row(i), data.w().row(i), v);
    return t_logcdf_std(-ct.mu_t / std::sqrt(ct.sigma2_t), params.nu + 1);
  }
  double eta = data.w().row(i).dot(params.gamma);
  return params.normal() ? norm_logcdf(-eta) : t_logcdf_std(-eta, params.nu);
}

double transform_rmt(double rm, bool selected) {
  if (!selected) {
    // C = 0: r_mt = sign(r_m) sqrt(-2 r_m), r_m <= 0
    return rm == 0 ? 0.0 : -std::sqrt(-2 * rm);
  }
  // C = 1: r_m in (-inf, 1]; the bracket r_m + ln(1 - r_m) is <= 0
  double inner = rm + std::log1p(-rm);
  double mag = std::sqrt(std::max(0.0, -2 * inner));
  return rm < 0 ? -mag : mag;
}

// quantile with linear interpolation (type 7)
double quantile(std::vector<double>& v, double p) {
  std::sort(v.begin(), v.end());
  const long n = static_cast<long>(v.size());
  if (n == 1) return v[0];
  double h = p * (n - 1);
  long lo = static_cast<long>(std::floor(h));
  long hi = std::min(lo + 1, n - 1);
  double w = h - lo;
  return (1 - w) * v[lo] + w * v[hi];
}

}  // namespace

ResidualSet martingale_residuals(const SlParams& params, const Dataset& data) {
  params.validate();
  const long n = data.n();
  ResidualSet out;
  out.r_m.resize(n);
  out.r_mt.resize(n);
  out.c = data.c();
  for (long i = 0; i < n; ++i) {
    double ls = log_survival(params, data, i);
    double rm = (data.selected(i) ? 1.0 : 0.0) + ls;
    out.r_m[i] = rm;
    if (!std::isfinite(ls) || rm == 1.0) {
      // S underflowed (r_mt -> -inf on that side) or S == 1 on a selected row
      out.r_mt[i] = std::isfinite(ls) ? kInf : -kInf;
      out.flagged.push_back(i);
      continue;
    }
    out.r_mt[i] = transform_rmt(rm, data.selected(i));
  }
  return out;
}

Envelope simulated_envelope(const SlParams& params, const Dataset& data,
                            const EnvelopeOptions& options) {
  params.validate();
  if (options.n_sim < 1) throw domain_error("simulated_envelope: n_sim must be >= 1");
  if (!(options.coverage >= 0 && options.coverage < 1))
    throw domain_error("simulated_envelope: coverage in [0,1)");
  const long n = data.n();
  const int m = options.n_sim;

  Eigen::MatrixXd sims(n, m);  // sorted residuals per replicate, one column each
  std::vector<uint8_t> ok(m, 1);
  parallel_for(m, options.threads, [&](long rep) {
    std::seed_seq seq{static_cast<uint32_t>(options.seed), static_cast<uint32_t>(options.seed >> 32),
                      static_cast<uint32_t>(rep + 1)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss;
    const double s = params.sigma();
    const double l21 = params.rho, l22 = std::sqrt(1 - params.rho * params.rho);

    std::vector<uint8_t> c(n);
    std::vector<std::optional<double>> v1(n);
    for (long i = 0; i < n; ++i) {
      double z1 = gauss(rng), z2 = gauss(rng);
      double scale = 1.0;
      if (!params.normal()) {
        std::gamma_distribution<double> mix(params.nu / 2, 2 / params.nu);
        scale = 1.0 / std::sqrt(mix(rng));
      }
      double e1 = s * z1 * scale;
      double e2 = (l21 * z1 + l22 * z2) * scale;
      double y2 = data.w().row(i).dot(params.gamma) + e2;
      c[i] = y2 > 0 ? 1 : 0;
      if (c[i]) v1[i] = data.x().row(i).dot(params.beta) + e1;
    }
    try {
      Dataset simulated(std::move(c), std::move(v1), data.x(), data.w());
      SlParams theta = params;
      if (options.refit) {
        FitOptions fo = options.fit_options;
        fo.threads = 1;
        theta = fit(simulated, fo).params;
      }
      ResidualSet rs = martingale_residuals(theta, simulated);
      Eigen::VectorXd col = rs.r_mt;
      std::sort(col.data(), col.data() + col.size());
      sims.col(rep) = col;
    } catch (const std::exception&) {
      ok[rep] = 0;  // degenerate replicate (e.g. one selection class under refit)
    }
  });

  Envelope env;
  env.coverage = options.coverage;
  env.n_sim = m;
  env.theoretical.resize(n);
  env.low.resize(n);
  env.median.resize(n);
  env.high.resize(n);
  double lo_p = (1 - options.coverage) / 2, hi_p = 1 - lo_p;
  for (long i = 0; i < n; ++i) {
    env.theoretical[i] = norm_quantile((i + 1 - 0.375) / (n + 0.25));
    std::vector<double> rank_vals;
    rank_vals.reserve(m);
    for (int rep = 0; rep < m; ++rep)
      if (ok[rep]) rank_vals.push_back(sims(i, rep));
    if (rank_vals.empty()) throw degenerate_truncation_error("all envelope replicates failed");
    std::vector<double> tmp = rank_vals;
    env.low[i] = quantile(tmp, lo_p);
    tmp = rank_vals;
    env.median[i] = quantile(tmp, 0.5);
    tmp = rank_vals;
    env.high[i] = quantile(tmp, hi_p);
  }
  ResidualSet obs = martingale_residuals(params, data);
  env.observed_sorted = obs.r_mt;
  std::sort(env.observed_sorted.data(), env.observed_sorted.data() + n);
  return env;
}

}  // namespace hsel
