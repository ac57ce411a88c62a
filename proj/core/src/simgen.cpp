#include "hsel/simgen.hpp"

#include <cmath>
#include <random>

#include "hsel/parallel.hpp"
#include "hsel/quadrature.hpp"
#include "hsel/special.hpp"

namespace hsel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::mt19937_64 seeded_rng(uint64_t master, uint64_t stream) {
  std::seed_seq seq{static_cast<uint32_t>(master), static_cast<uint32_t>(master >> 32),
                    static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

void DgpConfig::validate() const {
  if (family != DgpFamily::normal && !(nu > 0)) throw domain_error("dgp: nu must be positive");
  if (n < 8) throw domain_error("dgp: n too small");
  if (!(sigma2 > 0)) throw domain_error("dgp: sigma2 must be positive");
  if (!(std::abs(rho) < 1)) throw domain_error("dgp: |rho| < 1 required");
  if (!gamma0 && !(target_missing > 0 && target_missing < 1))
    throw domain_error("dgp: target_missing must lie in (0,1)");
}

double DgpConfig::resolved_gamma0() const {
  return gamma0 ? *gamma0 : calibrate_intercept(family, nu, target_missing);
}

double slash_cdf(double x, double nu) {
  if (!(nu > 0)) throw domain_error("slash_cdf: nu must be positive");
  if (x == 0) return 0.5;
  // F(x) = int_0^1 Phi(x v^{1/(2 nu)}) dv
  auto f = [&](double v) { return norm_cdf(x * std::pow(v, 1 / (2 * nu))); };
  return integrate(f, 0.0, 1.0, 1e-12).value;
}

double calibrate_intercept(DgpFamily family, double nu, double target_missing) {
  if (!(target_missing > 0 && target_missing < 1))
    throw domain_error("calibrate_intercept: target in (0,1) required");
  switch (family) {
    case DgpFamily::normal:
      return -norm_quantile(target_missing);
    case DgpFamily::t:
      return -t_quantile_std(target_missing, nu);
    case DgpFamily::slash: {
      // bisection on the quadrature CDF
      double lo = -50, hi = 50;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (slash_cdf(mid, nu) < target_missing)
          lo = mid;
        else
          hi = mid;
        if (hi - lo < 1e-12) break;
      }
      return -0.5 * (lo + hi);
    }
  }
  throw domain_error("calibrate_intercept: unknown family");
}

Dataset generate(const DgpConfig& config) {
  config.validate();
  const long n = config.n;
  const double g0 = config.resolved_gamma0();
  auto rng = seeded_rng(config.seed, 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss;

  const double s = std::sqrt(config.sigma2);
  const double l22 = std::sqrt(1 - config.rho * config.rho);

  Eigen::MatrixXd x(n, 2), w(n, 3);
  std::vector<uint8_t> c(n);
  std::vector<std::optional<double>> v1(n);
  for (long i = 0; i < n; ++i) {
    double w1 = unif(rng);
    double w2 = gauss(rng);
    double z1 = gauss(rng), z2 = gauss(rng);
    double mix = 1.0;
    if (config.family == DgpFamily::t) {
      std::gamma_distribution<double> gam(config.nu / 2, 2 / config.nu);
      mix = 1.0 / std::sqrt(gam(rng));
    } else if (config.family == DgpFamily::slash) {
      // U = V^{1/nu} ~ Beta(nu, 1); e = z / sqrt(U)
      double v = unit(rng);
      mix = std::pow(v, -1 / (2 * config.nu));
    }
    double e1 = s * z1 * mix;
    double e2 = (config.rho * z1 + l22 * z2) * mix;
    double y1 = config.beta[0] + config.beta[1] * w1 + e1;
    double y2 = g0 + config.gamma1 * w1 + config.gamma2 * w2 + e2;
    x(i, 0) = 1;
    x(i, 1) = w1;
    w(i, 0) = 1;
    w(i, 1) = w1;
    w(i, 2) = w2;
    c[i] = y2 > 0 ? 1 : 0;
    if (c[i]) v1[i] = y1;
  }
  return Dataset(std::move(c), std::move(v1), std::move(x), std::move(w));
}

namespace {

struct RepOutcome {
  bool usable = false;
  Eigen::VectorXd est;  // beta0 beta1 gamma0 gamma1 gamma2 sigma2 rho nu
  Eigen::VectorXd se;
  double aic = 0, bic = 0;
};

RepOutcome run_one(const Dataset& data, const FitOptions& base) {
  RepOutcome out;
  FitOptions fo = base;
  fo.threads = 1;
  FitResult fr = fit(data, fo);
  if (!fr.converged) return out;
  out.usable = true;
  out.est.resize(9);
  out.se.resize(9);
  const auto& pr = fr.params;
  out.est << pr.beta[0], pr.beta[1], pr.gamma[0], pr.gamma[1], pr.gamma[2], pr.sigma2, pr.sigma(),
      pr.rho, pr.normal() ? kNaN : pr.nu;
  // se layout from fit: (beta..., gamma..., sigma, rho); sigma2 by delta method
  out.se << fr.se[0], fr.se[1], fr.se[2], fr.se[3], fr.se[4], fr.se_sigma2(),
      fr.se[fr.se.size() - 2], fr.se[fr.se.size() - 1], kNaN;
  out.aic = fr.aic;
  out.bic = fr.bic;
  return out;
}

}  // namespace

std::vector<McSummary> mc_study(const DgpConfig& config, const std::vector<FitOptions>& fits,
                                int replicates, int parallelism,
                                std::vector<McRecord>* long_records) {
  config.validate();
  if (replicates < 1) throw domain_error("mc_study: replicates must be >= 1");
  if (fits.empty()) throw domain_error("mc_study: no fit configurations");

  const int nf = static_cast<int>(fits.size());
  std::vector<std::vector<RepOutcome>> results(nf);
  for (auto& v : results) v.resize(replicates);

  parallel_for(replicates, std::max(1, parallelism), [&](long rep) {
    DgpConfig rep_cfg = config;
    rep_cfg.seed = config.seed + 0x100000001ull * static_cast<uint64_t>(rep + 1);
    Dataset data = generate(rep_cfg);
    for (int f = 0; f < nf; ++f) {
      try {
        results[f][rep] = run_one(data, fits[f]);
      } catch (const std::exception&) {
        results[f][rep].usable = false;  // failures recorded, never abort the study
      }
    }
  });

  const std::vector<std::string> names = {"beta0", "beta1", "gamma0", "gamma1", "gamma2",
                                          "sigma2", "sigma", "rho",   "nu"};
  Eigen::VectorXd truth(9);
  truth << config.beta[0], config.beta[1], config.resolved_gamma0(), config.gamma1, config.gamma2,
      config.sigma2, std::sqrt(config.sigma2), config.rho,
      (config.family == DgpFamily::normal ? std::numeric_limits<double>::infinity() : config.nu);

  std::vector<McSummary> summaries;
  for (int f = 0; f < nf; ++f) {
    McSummary s;
    s.fit_label = fits[f].family == Family::normal ? "SLn" : "SLt";
    s.names = names;
    s.truth = truth;
    s.requested = replicates;
    Eigen::VectorXd sum_est = Eigen::VectorXd::Zero(9), sum_se = Eigen::VectorXd::Zero(9);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(9);
    Eigen::VectorXd count_se = Eigen::VectorXd::Zero(9);
    double sum_aic = 0, sum_bic = 0;
    int m = 0;
    for (int rep = 0; rep < replicates; ++rep) {
      const RepOutcome& r = results[f][rep];
      if (!r.usable) continue;
      ++m;
      sum_aic += r.aic;
      sum_bic += r.bic;
      for (int j = 0; j < 9; ++j) {
        if (std::isnan(r.est[j])) continue;
        sum_est[j] += r.est[j];
        sum_sq[j] += r.est[j] * r.est[j];
        if (!std::isnan(r.se[j])) {
          sum_se[j] += r.se[j];
          count_se[j] += 1;
        }
      }
      if (long_records) {
        for (int j = 0; j < 9; ++j) {
          if (std::isnan(r.est[j])) continue;
          double center = std::isfinite(truth[j]) ? r.est[j] - truth[j] : kNaN;
          long_records->push_back({rep, s.fit_label, names[j], r.est[j], center});
        }
      }
    }
    s.converged = m;
    s.failures = replicates - m;
    s.mean_est.resize(9);
    s.mean_se.resize(9);
    s.mc_sd.resize(9);
    bool is_normal_fit = fits[f].family == Family::normal;
    for (int j = 0; j < 9; ++j) {
      bool nu_row = j == 8;
      if (m == 0 || (nu_row && is_normal_fit)) {
        s.mean_est[j] = kNaN;
        s.mean_se[j] = kNaN;
        s.mc_sd[j] = kNaN;
        continue;
      }
      s.mean_est[j] = sum_est[j] / m;
      s.mean_se[j] = count_se[j] > 0 ? sum_se[j] / count_se[j] : kNaN;
      double var = m > 1 ? (sum_sq[j] - m * s.mean_est[j] * s.mean_est[j]) / (m - 1) : 0.0;
      s.mc_sd[j] = std::sqrt(std::max(0.0, var));
    }
    s.mean_aic = m > 0 ? sum_aic / m : kNaN;
    s.mean_bic = m > 0 ? sum_bic / m : kNaN;
    summaries.push_back(std::move(s));
  }
  return summaries;
}

}  // namespace hsel
