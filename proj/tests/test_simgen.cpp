#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hsel/simgen.hpp"
#include "hsel/special.hpp"
#include "support/oracles.hpp"

using namespace hsel;

TEST_CASE("calibrated intercepts reproduce the reference quantiles") {
  CHECK(calibrate_intercept(DgpFamily::normal, 0, 0.25) ==
        doctest::Approx(0.674489750196082).epsilon(1e-9));
  CHECK(calibrate_intercept(DgpFamily::t, 4, 0.25) ==
        doctest::Approx(0.740697084112683).epsilon(1e-8));
  CHECK(calibrate_intercept(DgpFamily::slash, 1.43, 0.25) ==
        doctest::Approx(0.924965317216632).epsilon(1e-7));
}

TEST_CASE("slash cdf basics") {
  CHECK(slash_cdf(0, 1.43) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(slash_cdf(3, 1.43) + slash_cdf(-3, 1.43) == doctest::Approx(1.0).epsilon(1e-10));
  // heavier than normal in the tail
  CHECK(1 - slash_cdf(3, 1.43) > 0.01);
}

TEST_CASE("generated missing rates match the calibrated marginal") {
  // With the covariate slopes zeroed, the selection error is the marginal law
  // and the missing rate equals the calibration target exactly.
  for (auto family : {DgpFamily::normal, DgpFamily::t, DgpFamily::slash}) {
    DgpConfig cfg;
    cfg.family = family;
    cfg.nu = family == DgpFamily::t ? 4.0 : 1.43;
    cfg.gamma1 = 0;
    cfg.gamma2 = 0;
    cfg.n = 1000000;
    cfg.seed = 31;
    Dataset d = generate(cfg);
    double missing = 1.0 - static_cast<double>(d.n_selected()) / d.n();
    CHECK(std::abs(missing - 0.25) < 0.005);
  }
}

TEST_CASE("full-design missing rate matches its quadrature value") {
  // The reference design keeps gamma0 at the marginal quantile, so with the
  // covariates in place the averaged missing rate sits near 27.5%, not 25%
  // (the extra index variance from 0.3 w1 - 0.5 w2 spreads the threshold).
  // Check the empirical rate against the averaged CDF computed by quadrature.
  for (auto family : {DgpFamily::normal, DgpFamily::t}) {
    double nu = 4.0;
    DgpConfig cfg;
    cfg.family = family;
    cfg.nu = nu;
    cfg.n = 1000000;
    cfg.seed = 33;
    Dataset d = generate(cfg);
    double missing = 1.0 - static_cast<double>(d.n_selected()) / d.n();
    double g0 = cfg.resolved_gamma0();
    auto cdf = [&](double z) {
      return family == DgpFamily::normal ? norm_cdf(z) : t_cdf_std(z, nu);
    };
    auto integrand = [&](double w1, double w2) {
      return 0.5 * norm_pdf(w2) * cdf(-(g0 + 0.3 * w1 - 0.5 * w2));
    };
    double expected = oracle::integrate2(integrand, -1, 1, -10, 10, 1e-8);
    CHECK(std::abs(missing - expected) < 0.005);
    CHECK(expected > 0.26);  // documented: the reference design censors ~27.5%
  }
}

TEST_CASE("seed determinism") {
  DgpConfig cfg;
  cfg.n = 500;
  cfg.seed = 77;
  Dataset a = generate(cfg);
  Dataset b = generate(cfg);
  CHECK(a.x() == b.x());
  CHECK(a.w() == b.w());
  CHECK(a.c() == b.c());
  for (long i = 0; i < a.n(); ++i)
    if (a.selected(i)) CHECK(a.outcome(i) == b.outcome(i));
  cfg.seed = 78;
  Dataset c = generate(cfg);
  CHECK(a.x() != c.x());
}

TEST_CASE("slash generator matches the quadrature MAD") {
  // median absolute deviation of the outcome error: the 75% quantile of the
  // symmetric slash law, computed from the quadrature CDF
  double nu = 1.43;
  double lo = 0, hi = 10;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    if (slash_cdf(mid, nu) < 0.75)
      lo = mid;
    else
      hi = mid;
  }
  double theoretical_mad = 0.5 * (lo + hi);

  DgpConfig cfg;
  cfg.family = DgpFamily::slash;
  cfg.nu = nu;
  cfg.n = 1000000;
  cfg.seed = 13;
  cfg.rho = 0.0;
  cfg.gamma0 = 50.0;  // keep every row selected so the outcome error is visible
  Dataset d = generate(cfg);
  std::vector<double> devs;
  devs.reserve(d.n());
  for (long i = 0; i < d.n(); ++i)
    if (d.selected(i)) devs.push_back(std::abs(d.outcome(i) - d.x().row(i).dot(Eigen::Vector2d(1.0, 0.5))));
  REQUIRE(devs.size() > 990000);  // heavy selection-error tails censor a handful
  std::nth_element(devs.begin(), devs.begin() + devs.size() / 2, devs.end());
  double sample_mad = devs[devs.size() / 2];
  CHECK(std::abs(sample_mad - theoretical_mad) / theoretical_mad < 0.02);
}

TEST_CASE("t generator satisfies the scale-mixture identity") {
  // E[(nu+2)/(nu+delta)] = 1 for bivariate t errors
  DgpConfig cfg;
  cfg.family = DgpFamily::t;
  cfg.nu = 4;
  cfg.n = 400000;
  cfg.seed = 17;
  cfg.gamma0 = 50.0;  // all selected: both errors recoverable
  Dataset d = generate(cfg);
  double s = std::sqrt(cfg.sigma2);
  double acc = 0;
  long m = 0;
  for (long i = 0; i < d.n(); ++i) {
    if (!d.selected(i)) continue;
    double e1 = d.outcome(i) - d.x().row(i).dot(Eigen::Vector2d(1.0, 0.5));
    // recover e2 is impossible (latent); use the marginal identity instead:
    double delta1 = e1 * e1 / cfg.sigma2;
    acc += (cfg.nu + 1) / (cfg.nu + delta1);  // univariate version, equals 1 in mean
    ++m;
  }
  (void)s;
  CHECK(acc / m == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("mc_study with one replicate equals the single fit") {
  DgpConfig cfg;
  cfg.n = 300;
  cfg.seed = 41;
  FitOptions fo;
  fo.family = Family::normal;
  auto summaries = mc_study(cfg, {fo}, 1, 1);
  REQUIRE(summaries.size() == 1);
  CHECK(summaries[0].converged == 1);
  DgpConfig rep = cfg;
  rep.seed = cfg.seed + 0x100000001ull;
  Dataset d = generate(rep);
  FitResult fr = fit(d, fo);
  CHECK(summaries[0].mean_est[0] == doctest::Approx(fr.params.beta[0]).epsilon(1e-14));
  CHECK(summaries[0].mean_aic == doctest::Approx(fr.aic).epsilon(1e-12));
  CHECK(summaries[0].mc_sd[0] == 0.0);
}

TEST_CASE("mc_study determinism and parallel equivalence") {
  DgpConfig cfg;
  cfg.n = 200;
  cfg.seed = 51;
  FitOptions fo;
  fo.family = Family::normal;
  auto serial = mc_study(cfg, {fo}, 6, 1);
  auto parallel = mc_study(cfg, {fo}, 6, 2);
  CHECK(serial[0].mean_est[0] == parallel[0].mean_est[0]);
  CHECK(serial[0].mc_sd[6] == parallel[0].mc_sd[6]);
  CHECK(serial[0].mean_aic == parallel[0].mean_aic);
}

TEST_CASE("long records carry centered estimates") {
  DgpConfig cfg;
  cfg.n = 200;
  cfg.seed = 61;
  FitOptions fo;
  fo.family = Family::normal;
  std::vector<McRecord> records;
  auto summaries = mc_study(cfg, {fo}, 3, 2, &records);
  CHECK(!records.empty());
  for (const auto& r : records) {
    if (r.param == "beta0") CHECK(r.centered == doctest::Approx(r.estimate - 1.0).epsilon(1e-14));
    if (r.param == "nu") CHECK(std::isnan(r.centered));
  }
  CHECK(summaries[0].requested == 3);
}
