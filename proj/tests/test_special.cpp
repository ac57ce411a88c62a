#include <doctest.h>

#include <cmath>
#include <random>

#include "hsel/special.hpp"
#include "support/oracles.hpp"

using namespace hsel;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Rect2 rect(double a1, double b1, double a2, double b2) {
  Rect2 r;
  r.x1 = {a1, b1};
  r.x2 = {a2, b2};
  return r;
}
}  // namespace

TEST_CASE("normal pdf") {
  CHECK(norm_pdf(0, 0, 1) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(norm_pdf(1, 1, 4) == doctest::Approx(0.19947114020071633).epsilon(1e-12));
  // exp(-2)/sqrt(2 pi), 40-digit quadrature oracle
  CHECK(norm_pdf(2, 0, 1) == doctest::Approx(0.05399096651318806).epsilon(1e-12));
  CHECK(norm_pdf(kInf) == 0.0);
  CHECK_THROWS_AS(norm_pdf(0, 0, -1), domain_error);
  CHECK_THROWS_AS(norm_pdf(0, 0, 0.0), domain_error);
}

TEST_CASE("normal cdf") {
  CHECK(norm_cdf(0) == 0.5);
  CHECK(norm_cdf(kInf) == 1.0);
  CHECK(norm_cdf(-kInf) == 0.0);
  // Phi(1.959964) from the high-precision oracle; and the exact 97.5% point
  CHECK(norm_cdf(1.959964) == doctest::Approx(0.9750000009035576).epsilon(1e-12));
  CHECK(std::abs(norm_cdf(1.959963984540054) - 0.975) < 1e-14);
  for (double x : {-5.0, -1.3, -0.2, 0.4, 2.7, 6.0})
    CHECK(norm_cdf(-x) == doctest::Approx(1.0 - norm_cdf(x)).epsilon(1e-14));
  // vs independent quadrature of the density
  for (double x : {-3.0, -0.7, 0.9, 2.2}) {
    double q = oracle::integrate([](double t) { return norm_pdf(t); }, -kInf, x, 1e-13);
    CHECK(norm_cdf(x) == doctest::Approx(q).epsilon(1e-11));
  }
}

TEST_CASE("log normal cdf deep tail") {
  // ln Phi(x) ~ -x^2/2 - ln(-x sqrt(2 pi)) for x -> -inf
  for (double x : {-10.0, -37.0, -40.0, -100.0, -300.0}) {
    double asym = -0.5 * x * x - std::log(-x * std::sqrt(2 * M_PI));
    CHECK(norm_logcdf(x) == doctest::Approx(asym).epsilon(1e-2));
    CHECK(std::isfinite(norm_logcdf(x)));
  }
  CHECK(norm_logcdf(0.0) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  CHECK(norm_logcdf(-8) == doctest::Approx(std::log(norm_cdf(-8))).epsilon(1e-12));
}

TEST_CASE("normal quantile round trip") {
  for (double p : {1e-12, 1e-6, 0.02425, 0.25, 0.5, 0.75, 0.999, 1 - 1e-9})
    CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  CHECK(norm_quantile(0.75) == doctest::Approx(0.6744897501960817).epsilon(1e-12));
}

TEST_CASE("mills ratio") {
  CHECK(mills_ratio(0) == doctest::Approx(0.7978845608028654).epsilon(1e-13));
  CHECK(mills_ratio(8) < 1e-14);
  // high-precision oracle value; the asymptotic -a + 1/(-a) is only approximate
  CHECK(mills_ratio(-8) == doctest::Approx(8.121368112236113).epsilon(1e-12));
  CHECK(mills_ratio(-8) == doctest::Approx(8.0 + 1.0 / 8.0).epsilon(2e-3));
  CHECK(std::isfinite(mills_ratio(-40)));
  CHECK(mills_ratio(-40) == doctest::Approx(40.0 + 1.0 / 40.0).epsilon(1e-4));
  // strictly decreasing on a grid (grid capped where phi is representable)
  double prev = mills_ratio(-40);
  for (double a = -39.5; a <= 37; a += 0.5) {
    double cur = mills_ratio(a);
    CHECK(cur < prev);
    CHECK(cur > 0);
    prev = cur;
  }
}

TEST_CASE("t pdf") {
  CHECK(t_pdf(0, {0, 1, 1}) == doctest::Approx(1.0 / M_PI).epsilon(1e-13));
  CHECK(t_pdf(0, {0, 1, 1e8}) == doctest::Approx(0.3989422804014327).epsilon(1e-6));
  CHECK(t_pdf(1, {0, 1, 4}) == doctest::Approx(0.21466252583997981).epsilon(1e-12));
  CHECK_THROWS_AS(t_pdf(0, {0, -1, 4}), domain_error);
  CHECK_THROWS_AS(t_pdf(0, {0, 1, -4}), domain_error);
}

TEST_CASE("t pdf normal limit on a grid") {
  for (double x = -6; x <= 6; x += 0.37)
    CHECK(std::abs(t_pdf(x, {0.3, 2.0, 1e8}) - norm_pdf(x, 0.3, 2.0)) < 1e-6);
}

TEST_CASE("t cdf") {
  CHECK(t_cdf(0, {0, 1, 7}) == 0.5);
  CHECK(t_cdf(1, {0, 1, 1}) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(t_cdf(2, {0, 1, 4}) == doctest::Approx(0.941941738241592).epsilon(1e-13));
  // vs adaptive quadrature of t_pdf at several dof, including huge
  for (double nu : {0.7, 2.5, 4.0, 33.0, 1500.0, 5e5, 1e8}) {
    for (double x : {-2.7, -0.4, 1.1, 3.3}) {
      double q = oracle::integrate([&](double t) { return t_pdf_std(t, nu); }, -kInf, x, 5e-13);
      CHECK(std::abs(t_cdf_std(x, nu) - q) < 1e-11);
    }
  }
  for (double x : {-4.0, -1.0, 0.5, 5.0})
    CHECK(std::abs(t_cdf_std(x, 1e8) - norm_cdf(x)) < 1e-6);
}

TEST_CASE("t log cdf deep tail") {
  // linear-range agreement
  for (double nu : {3.0, 40.0, 2e6}) {
    for (double x : {-9.0, -2.0, 0.0, 1.5})
      CHECK(t_logcdf_std(x, nu) == doctest::Approx(std::log(t_cdf_std(x, nu))).epsilon(1e-10));
  }
  // deep tail stays finite and decreasing, polynomial decay ~ -nu ln|x|
  double l1 = t_logcdf_std(-1e4, 5), l2 = t_logcdf_std(-1e6, 5);
  CHECK(std::isfinite(l1));
  CHECK(l2 < l1);
  CHECK(l2 - l1 == doctest::Approx(-5 * std::log(1e2)).epsilon(1e-3));
  // normal-regime deep tail
  CHECK(std::isfinite(t_logcdf_std(-45.0, 1e8)));
  CHECK(t_logcdf_std(-45.0, 1e8) == doctest::Approx(norm_logcdf(-45.0)).epsilon(1e-4));
}

TEST_CASE("t quantile round trip") {
  for (double nu : {1.0, 3.7, 24.0, 900.0}) {
    for (double p : {1e-8, 0.03, 0.25, 0.6, 0.97, 1 - 1e-7}) {
      double x = t_quantile_std(p, nu);
      CHECK(t_cdf_std(x, nu) == doctest::Approx(p).epsilon(1e-10));
    }
  }
  CHECK(t_quantile_std(0.75, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bvn rectangle probabilities") {
  Eigen::Vector2d mu0 = Eigen::Vector2d::Zero();
  CHECK(bvn_rect(rect(-kInf, 0, -kInf, 0), mu0, {1, 0}) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(bvn_rect(rect(-kInf, kInf, -kInf, kInf), mu0, {1, 0.37}) == 1.0);
  // orthant identity 1/4 + asin(rho)/(2 pi)
  CHECK(bvn_rect(rect(-kInf, 0, -kInf, 0), mu0, {1, 0.6}) ==
        doctest::Approx(0.3524163823495667).epsilon(1e-12));
  // high-precision oracle value for a generic rectangle
  CHECK(bvn_rect(rect(-0.5, 1.2, -1.0, 0.7), mu0, {1, 0.35}) ==
        doctest::Approx(0.35327825360282854).epsilon(1e-11));
  CHECK(bvn_rect(rect(0.4, 0.4, -1, 1), mu0, {1, 0.2}) == 0.0);  // degenerate
  CHECK_THROWS_AS(bvn_rect(rect(-1, 1, -1, 1), mu0, {1, 1.0}), domain_error);
}

TEST_CASE("bvt rectangle probabilities") {
  Eigen::Vector2d mu0 = Eigen::Vector2d::Zero();
  CHECK(bvt_rect(rect(-kInf, 0, -kInf, 0), mu0, {1, 0}, 4) == doctest::Approx(0.25).epsilon(1e-11));
  CHECK(bvt_rect(rect(-kInf, kInf, -kInf, kInf), mu0, {1, 0.5}, 2.5) == 1.0);
  // elliptical orthant identity holds for every nu; cross-checked by quadrature
  CHECK(bvt_rect(rect(-kInf, 0, -kInf, 0), mu0, {1, 0.6}, 4) ==
        doctest::Approx(0.3524163823495667).epsilon(1e-10));
  CHECK(bvt_rect(rect(-0.5, 1.2, -1.0, 0.7), mu0, {1, 0.35}, 5) ==
        doctest::Approx(0.32697911875594416).epsilon(1e-9));
  CHECK_THROWS_AS(bvt_rect(rect(-1, 1, -1, 1), mu0, {1, 0}, -1), domain_error);
}

TEST_CASE("bvt orthant via monte carlo") {
  // scale-mixture draws; agreement within 3 binomial standard errors
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  std::gamma_distribution<double> mix(2.0, 0.5);  // nu=4
  const long n = 2'000'000;
  long hits = 0;
  const double rho = 0.6, l22 = std::sqrt(1 - rho * rho);
  for (long i = 0; i < n; ++i) {
    double z1 = g(rng), z2 = g(rng);
    double u = mix(rng);
    double e1 = z1 / std::sqrt(u), e2 = (rho * z1 + l22 * z2) / std::sqrt(u);
    if (e1 <= 0 && e2 <= 0) ++hits;
  }
  double p_mc = static_cast<double>(hits) / n;
  double se = std::sqrt(p_mc * (1 - p_mc) / n);
  double p = bvt_rect(rect(-kInf, 0, -kInf, 0), Eigen::Vector2d::Zero(), {1, rho}, 4);
  CHECK(std::abs(p - p_mc) < 3 * se);
}

TEST_CASE("rectangle monotonicity and additivity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2, 2);
  Eigen::Vector2d mu0 = Eigen::Vector2d::Zero();
  for (int it = 0; it < 50; ++it) {
    double a1 = u(rng), b1 = a1 + std::abs(u(rng)) + 0.1;
    double a2 = u(rng), b2 = a2 + std::abs(u(rng)) + 0.1;
    double rho = 0.9 * std::tanh(u(rng));
    BivariateScale sc{0.5 + std::abs(u(rng)), rho};
    double base = bvn_rect(rect(a1, b1, a2, b2), mu0, sc);
    // monotone in the upper bound, antitone in the lower bound
    CHECK(bvn_rect(rect(a1, b1 + 0.5, a2, b2), mu0, sc) >= base - 1e-13);
    CHECK(bvn_rect(rect(a1 + 0.05, b1, a2, b2), mu0, sc) <= base + 1e-13);
    // split along coordinate 1
    double mid = 0.5 * (a1 + b1);
    double left = bvn_rect(rect(a1, mid, a2, b2), mu0, sc);
    double right = bvn_rect(rect(mid, b1, a2, b2), mu0, sc);
    CHECK(base == doctest::Approx(left + right).epsilon(1e-10));

    double nu = 2.2 + 8 * std::abs(std::tanh(u(rng)));
    double tb = bvt_rect(rect(a1, b1, a2, b2), mu0, sc, nu);
    double tl = bvt_rect(rect(a1, mid, a2, b2), mu0, sc, nu);
    double tr = bvt_rect(rect(mid, b1, a2, b2), mu0, sc, nu);
    CHECK(tb == doctest::Approx(tl + tr).epsilon(1e-9));
    CHECK(bvt_rect(rect(a1, b1 + 0.5, a2, b2), mu0, sc, nu) >= tb - 1e-11);
  }
}

TEST_CASE("bvt normal limit on random rectangles") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int it = 0; it < 100; ++it) {
    double a1 = u(rng), b1 = a1 + 0.2 + std::abs(u(rng));
    double a2 = u(rng), b2 = a2 + 0.2 + std::abs(u(rng));
    if (it % 3 == 0) a1 = -kInf;
    if (it % 4 == 0) b2 = kInf;
    double rho = 0.85 * std::tanh(u(rng));
    Eigen::Vector2d mu(u(rng) * 0.3, u(rng) * 0.3);
    BivariateScale sc{1.3, rho};
    double pn = bvn_rect(rect(a1, b1, a2, b2), mu, sc);
    double pt = bvt_rect(rect(a1, b1, a2, b2), mu, sc, 1e8);
    CHECK(std::abs(pn - pt) < 1e-6);
  }
}

TEST_CASE("bvn/bvt vs independent 2-D quadrature") {
  Eigen::Vector2d mu(0.3, -0.2);
  BivariateScale sc{2.0, -0.45};
  double s = std::sqrt(sc.sigma2);
  auto npdf2 = [&](double x, double y) {
    double det = sc.sigma2 * (1 - sc.rho * sc.rho);
    double q = (x - 0.3) * (x - 0.3) / sc.sigma2 - 2 * sc.rho * (x - 0.3) * (y + 0.2) / s +
               (y + 0.2) * (y + 0.2);
    return std::exp(-q / (2 * (1 - sc.rho * sc.rho))) / (2 * M_PI * std::sqrt(det));
  };
  double q = oracle::integrate2(npdf2, -1, 1.5, -2, 0.5, 1e-10);
  CHECK(bvn_rect(rect(-1, 1.5, -2, 0.5), mu, sc) == doctest::Approx(q).epsilon(1e-8));
}

TEST_CASE("log rectangle kernels match linear values") {
  Eigen::Vector2d mu(0.4, -0.1);
  BivariateScale sc{1.7, 0.52};
  Rect2 r = rect(-kInf, kInf, -kInf, 0.3);
  CHECK(log_bvn_rect(r, mu, sc) == doctest::Approx(std::log(bvn_rect(r, mu, sc))).epsilon(1e-12));
  CHECK(log_bvt_rect(r, mu, sc, 5) ==
        doctest::Approx(std::log(bvt_rect(r, mu, sc, 5))).epsilon(1e-12));
  Rect2 g = rect(-0.5, 1.0, -1.0, 0.5);
  CHECK(log_bvn_rect(g, mu, sc) == doctest::Approx(std::log(bvn_rect(g, mu, sc))).epsilon(1e-10));
}

TEST_CASE("incomplete beta sanity") {
  CHECK(inc_beta(2, 3, 0.0) == 0.0);
  CHECK(inc_beta(2, 3, 1.0) == 1.0);
  // I_x(1, b) = 1 - (1-x)^b
  CHECK(inc_beta(1, 4, 0.3) == doctest::Approx(1 - std::pow(0.7, 4)).epsilon(1e-13));
  CHECK(std::exp(log_inc_beta(0.5, 2.5, 0.2)) ==
        doctest::Approx(inc_beta(0.5, 2.5, 0.2)).epsilon(1e-12));
}

TEST_CASE("lgamma_diff large arguments") {
  // against exact ratios: Gamma(b+1)/Gamma(b) = b
  for (double b : {3.0, 49.9, 50.1, 1e4, 5e7})
    CHECK(lgamma_diff(b, 1.0) == doctest::Approx(std::log(b)).epsilon(1e-14));
  // half-integer shift at huge b: ln Gamma(b+1/2) - ln Gamma(b) ~ 0.5 ln b
  double b = 5e7;
  CHECK(lgamma_diff(b, 0.5) == doctest::Approx(0.5 * std::log(b)).epsilon(1e-8));
}
