#include <algorithm>
#include <cmath>
#include <limits>

#include "hsel/special.hpp"

namespace hsel {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // ln sqrt(2*pi)
constexpr double kInf = std::numeric_limits<double>::infinity();

// Stirling correction S(z) with lnGamma(z) = (z-1/2)ln z - z + ln sqrt(2pi) + S(z).
double stirling_series(double z) {
  double r = 1.0 / z, r2 = r * r;
  return r * (1.0 / 12 + r2 * (-1.0 / 360 + r2 * (1.0 / 1260 + r2 * (-1.0 / 1680))));
}

// erfcx(z) = exp(z^2) erfc(z) for large positive z, by the asymptotic series.
double erfcx_large(double z) {
  double z2 = 2 * z * z, term = 1, sum = 1;
  for (int n = 1; n <= 12; ++n) {
    term *= -(2 * n - 1) / z2;
    sum += term;
    if (std::abs(term) < 1e-18) break;
  }
  return sum / (z * 1.7724538509055160273);  // sqrt(pi)
}

}  // namespace

double lgamma_diff(double b, double a) {
  if (!(b > 0) || !(b + a > 0)) throw domain_error("lgamma_diff requires b>0, b+a>0");
  if (b < 50 || b + a < 50) return std::lgamma(b + a) - std::lgamma(b);
  // (b-1/2) log1p(a/b) + a ln(b+a) - a + S(b+a) - S(b), all terms O(a ln b).
  return (b - 0.5) * std::log1p(a / b) + a * std::log(b + a) - a +
         stirling_series(b + a) - stirling_series(b);
}

double log_beta(double a, double b) {
  if (a <= b) std::swap(a, b);  // a = max
  return std::lgamma(b) - lgamma_diff(a, b);
}

namespace {

// Lentz continued fraction for the incomplete beta (NR form). Requires
// x < (a+1)/(a+b+2) for fast convergence; callers arrange that.
double betacf(double a, double b, double x) {
  constexpr int kMaxIt = 3000;
  constexpr double kEps = 3e-17, kFpMin = 1e-300;
  double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1, d = 1 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= kMaxIt; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double inc_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw domain_error("inc_beta requires a,b > 0");
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  double lbt = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1) / (a + b + 2)) return std::exp(lbt) * betacf(a, b, x) / a;
  return 1.0 - std::exp(lbt) * betacf(b, a, 1 - x) / b;
}

double log_inc_beta(double a, double b, double x) {
  if (x <= 0) return -kInf;
  if (x >= 1) return 0;
  if (x < (a + 1) / (a + b + 2)) {
    double lbt = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    return lbt + std::log(betacf(a, b, x) / a);
  }
  double v = inc_beta(a, b, x);
  return std::log(v);
}

// ---- normal ----------------------------------------------------------------

double norm_pdf(double x, double mu, double sigma2) {
  if (!(sigma2 > 0)) throw domain_error("norm_pdf: sigma2 must be positive");
  if (std::isinf(x)) return 0;
  double z = (x - mu) / std::sqrt(sigma2);
  return std::exp(-0.5 * z * z - kLogSqrt2Pi) / std::sqrt(sigma2);
}

double norm_logpdf(double x, double mu, double sigma2) {
  if (!(sigma2 > 0)) throw domain_error("norm_logpdf: sigma2 must be positive");
  double z = (x - mu) / std::sqrt(sigma2);
  return -0.5 * z * z - kLogSqrt2Pi - 0.5 * std::log(sigma2);
}

double norm_cdf(double x) {
  if (x == kInf) return 1;
  if (x == -kInf) return 0;
  return 0.5 * std::erfc(-x / kSqrt2);
}

double norm_tail(double x) { return norm_cdf(-x); }

double norm_logcdf(double x) {
  if (x >= -1) return std::log1p(-0.5 * std::erfc(x / kSqrt2));
  if (x > -37.0) return std::log(0.5 * std::erfc(-x / kSqrt2));
  // erfc underflows; switch to the scaled form Phi(x) = erfcx(z) e^{-z^2}/2.
  double z = -x / kSqrt2;
  return std::log(0.5 * erfcx_large(z)) - z * z;
}

double norm_interval(double a, double b) {
  if (!(a < b)) return 0;
  if (a >= 0) return norm_tail(a) - norm_tail(b);
  if (b <= 0) return norm_cdf(b) - norm_cdf(a);
  return 1.0 - norm_cdf(a) - norm_tail(b);  // a < 0 < b, both terms < 1/2
}

double norm_quantile(double p) {
  if (!(p >= 0 && p <= 1)) throw domain_error("norm_quantile: p outside [0,1]");
  if (p == 0) return -kInf;
  if (p == 1) return kInf;
  // Acklam's rational initializer, then two Halley polish steps against the
  // erfc-based CDF (final accuracy ~1 ulp).
  static const double A[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double B[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double C[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double D[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
        ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1);
  } else if (p <= 1 - plow) {
    double q = p - 0.5, r = q * q;
    x = (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q /
        (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
        ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1);
  }
  for (int it = 0; it < 2; ++it) {
    double e = norm_cdf(x) - p;
    double u = e / norm_pdf(x);
    x -= u / (1 + 0.5 * x * u);
  }
  return x;
}

double mills_ratio(double a) {
  if (a == kInf) return 0;
  if (a == -kInf) return kInf;
  return std::exp(norm_logpdf(a) - norm_logcdf(a));
}

// ---- Student-t --------------------------------------------------------------

namespace {

constexpr double kNuAsympt = 4e5;    // above this, the large-nu tail expansion wins
constexpr double kLogSqrtPi = 0.57236494292470008707;

// T_nu(x) - Phi(x) ~ phi(x) [c1(x)/nu + c2(x)/nu^2] for large nu; returns the
// pair (c1/nu + c2/nu^2) without the phi factor.
double t_cdf_correction_factor(double x, double nu) {
  double x2 = x * x;
  double c1 = -x * (x2 + 1) / 4;
  double c2 = x * (((-3 * x2 + 7) * x2 + 5) * x2 + 3) / 96;
  return c1 / nu + c2 / (nu * nu);
}

// ln(nu/(nu+x^2)) and ln(x^2/(nu+x^2)) at full relative accuracy, without
// overflowing x^2.
void log_t_beta_args(double x, double nu, double* log_u, double* log_1mu) {
  double ax = std::abs(x);
  if (ax > 1e100) {
    double r = nu / ax / ax;  // nu/x^2, no overflow
    *log_u = std::log(nu) - 2 * std::log(ax) - std::log1p(r);
    *log_1mu = -std::log1p(r);
  } else {
    *log_u = -std::log1p(x * x / nu);
    *log_1mu = 2 * std::log(ax) - std::log(nu) + *log_u;
  }
}

}  // namespace

double t_tail_std(double x, double nu) {
  if (!(nu > 0)) throw domain_error("t_tail_std: nu must be positive");
  if (x == kInf) return 0;
  if (x == -kInf) return 1;
  if (x < 0) return 1.0 - t_tail_std(-x, nu);
  if (x == 0) return 0.5;
  if (nu > kNuAsympt && x * x * x * x < 0.04 * nu) {
    double v = norm_tail(x) - norm_pdf(x) * t_cdf_correction_factor(x, nu);
    return std::min(1.0, std::max(0.0, v));
  }
  // tail = I_u(a, b)/2 with u = nu/(nu+x^2), a = nu/2, b = 1/2; the beta
  // prefactor is assembled from log1p-accurate logs so huge nu stays exact.
  double a = 0.5 * nu, b = 0.5;
  double log_u, log_1mu;
  log_t_beta_args(x, nu, &log_u, &log_1mu);
  double u = std::exp(log_u);
  double lbt = a * log_u + b * log_1mu - log_beta(a, b);
  if (u < (a + 1) / (a + b + 2)) return 0.5 * std::exp(lbt) * betacf(a, b, u) / a;
  double om_u = (std::abs(x) > 1e100) ? 1.0 : (x * x) / (nu + x * x);
  return 0.5 * (1.0 - std::exp(lbt) * betacf(b, a, om_u) / b);
}

double t_cdf_std(double x, double nu) {
  if (x <= 0) return t_tail_std(-x, nu);
  return 1.0 - t_tail_std(x, nu);
}

double t_logcdf_std(double x, double nu) {
  if (x == -kInf) return -kInf;
  if (x >= 0) return std::log1p(-t_tail_std(x, nu));
  double tail = t_tail_std(-x, nu);  // = T(x), the value wanted
  if (tail > 1e-290) return std::log(tail);
  if (nu > kNuAsympt && x * x * x * x < 0.04 * nu) {
    // normal-regime deep tail (x^4 << nu): correct ln Phi multiplicatively
    double lq = norm_logcdf(x);
    double log_corr = norm_logpdf(x) + std::log(t_cdf_correction_factor(x, nu));
    return lq + std::log1p(std::exp(log_corr - lq));
  }
  double a = 0.5 * nu, b = 0.5;
  double log_u, log_1mu;
  log_t_beta_args(x, nu, &log_u, &log_1mu);
  double u = std::exp(log_u);
  // deep tail implies u below the CF switch point, so the direct branch applies
  double lbt = a * log_u + b * log_1mu - log_beta(a, b);
  return std::log(0.5) + lbt + std::log(betacf(a, b, u) / a);
}

double t_cdf(double x, const UnivariateT& d) {
  d.validate();
  return t_cdf_std((x - d.mu) / std::sqrt(d.sigma2), d.nu);
}

double t_interval_std(double a, double b, double nu) {
  if (!(a < b)) return 0;
  if (a >= 0) return t_tail_std(a, nu) - t_tail_std(b, nu);
  if (b <= 0) return t_tail_std(-b, nu) - t_tail_std(-a, nu);
  return 1.0 - t_tail_std(-a, nu) - t_tail_std(b, nu);
}

double t_logpdf_std(double x, double nu) {
  if (!(nu > 0)) throw domain_error("t_logpdf_std: nu must be positive");
  if (std::isinf(x)) return -kInf;
  double lgr = lgamma_diff(0.5 * nu, 0.5);  // ln Gamma((nu+1)/2) - ln Gamma(nu/2)
  double log_u, log_1mu;
  log_t_beta_args(x, nu, &log_u, &log_1mu);
  (void)log_1mu;
  // (1 + x^2/nu)^{-(nu+1)/2} = exp(0.5 (nu+1) ln(nu/(nu+x^2)))
  return lgr - 0.5 * std::log(nu) - kLogSqrtPi + 0.5 * (nu + 1) * log_u;
}

double t_pdf_std(double x, double nu) {
  if (std::isinf(x)) return 0;
  return std::exp(t_logpdf_std(x, nu));
}

double t_pdf(double x, const UnivariateT& d) {
  d.validate();
  double s = std::sqrt(d.sigma2);
  return t_pdf_std((x - d.mu) / s, d.nu) / s;
}

double t_logpdf(double x, const UnivariateT& d) {
  d.validate();
  double s = std::sqrt(d.sigma2);
  return t_logpdf_std((x - d.mu) / s, d.nu) - std::log(s);
}

double t_quantile_std(double p, double nu) {
  if (!(p >= 0 && p <= 1)) throw domain_error("t_quantile_std: p outside [0,1]");
  if (p == 0) return -kInf;
  if (p == 1) return kInf;
  if (p == 0.5) return 0;
  if (p < 0.5) return -t_quantile_std(1 - p, nu);
  // p > 0.5: bracket [0, hi] then bisect + Newton polish.
  double z = norm_quantile(p);
  double hi = std::max(2.0, 2 * z);
  if (nu < 2) {
    double cauchy = std::tan(M_PI * (p - 0.5));
    hi = std::max(hi, 4 * std::abs(cauchy) + 4);
  }
  while (t_cdf_std(hi, nu) < p && hi < 1e300) hi *= 2;
  double lo = 0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (t_cdf_std(mid, nu) < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15 * (1 + std::abs(lo))) break;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    double f = t_cdf_std(x, nu) - p, d = t_pdf_std(x, nu);
    if (d <= 0) break;
    x -= f / d;
  }
  return x;
}

}  // namespace hsel
