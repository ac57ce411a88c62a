#pragma once

#include <Eigen/Core>

#include "hsel/errors.hpp"
#include "hsel/interval.hpp"

namespace hsel {

/// Location-scale Student-t law; nu is a positive real (never rounded to an
/// integer: the profile step optimizes it continuously).
struct UnivariateT {
  double mu = 0;
  double sigma2 = 1;
  double nu = 1;

  void validate() const {
    if (!(sigma2 > 0) || !std::isfinite(sigma2)) throw domain_error("sigma2 must be positive");
    if (!(nu > 0)) throw domain_error("nu must be positive");
    if (!std::isfinite(mu)) throw domain_error("mu must be finite");
  }
};

/// Dispersion of the bivariate error law, Sigma = [[s2, rho*s],[rho*s, 1]].
/// The (2,2) entry is pinned to 1 structurally.
struct BivariateScale {
  double sigma2 = 1;
  double rho = 0;

  void validate() const {
    if (!(sigma2 > 0) || !std::isfinite(sigma2)) throw domain_error("sigma2 must be positive");
    if (!(std::abs(rho) < 1)) throw domain_error("|rho| must be < 1");
  }
};

/// General symmetric 2x2 scale matrix [[s11, s12],[s12, s22]]. Scaled
/// covariances (nu*Sigma/(nu+2r) and friends) land here, so the moment and
/// rectangle kernels work at this level.
struct Cov2 {
  double s11 = 1, s12 = 0, s22 = 1;

  static Cov2 from(const BivariateScale& s) {
    double sd = std::sqrt(s.sigma2);
    return {s.sigma2, s.rho * sd, 1.0};
  }
  Cov2 scaled(double c) const { return {c * s11, c * s12, c * s22}; }
  double det() const { return s11 * s22 - s12 * s12; }
  double corr() const { return s12 / std::sqrt(s11 * s22); }
  void validate() const {
    if (!(s11 > 0) || !(s22 > 0) || !(det() > 0)) throw domain_error("scale matrix not positive definite");
  }
};

// ---- gamma/beta machinery ----------------------------------------------

/// ln Gamma(b+a) - ln Gamma(b), accurate for huge b (Stirling difference; the
/// naive lgamma subtraction loses ~8 digits at b ~ 1e8).
double lgamma_diff(double b, double a);

/// ln B(a, b)
double log_beta(double a, double b);

/// Regularized incomplete beta I_x(a, b) by Lentz continued fraction.
double inc_beta(double a, double b, double x);

/// ln I_x(a, b), usable when I underflows (deep t tails).
double log_inc_beta(double a, double b, double x);

// ---- normal kernels ------------------------------------------------------

double norm_pdf(double x, double mu = 0, double sigma2 = 1);
double norm_logpdf(double x, double mu = 0, double sigma2 = 1);
double norm_cdf(double x);
/// Upper tail Q(x) = 1 - Phi(x), relative-accurate in the tail.
double norm_tail(double x);
/// ln Phi(x), stable for arbitrarily negative x (no underflow down to the
/// double exponent limit; uses the scaled complementary error function).
double norm_logcdf(double x);
double norm_quantile(double p);
/// P(a <= Z <= b) for standard normal Z, cancellation-aware in the tails.
double norm_interval(double a, double b);

/// Inverse Mills ratio phi(a)/Phi(a); stable far into the left tail.
double mills_ratio(double a);

// ---- Student-t kernels ---------------------------------------------------

double t_pdf_std(double x, double nu);
double t_logpdf_std(double x, double nu);
double t_cdf_std(double x, double nu);
double t_tail_std(double x, double nu);
double t_logcdf_std(double x, double nu);
double t_quantile_std(double p, double nu);
double t_interval_std(double a, double b, double nu);

double t_pdf(double x, const UnivariateT& d);
double t_logpdf(double x, const UnivariateT& d);
double t_cdf(double x, const UnivariateT& d);

// ---- bivariate rectangle probabilities -----------------------------------
//
// Both laws are integrated the same way: condition on the first coordinate
// (the conditional is again normal resp. t with nu+1 dof) and run adaptive
// Gauss-Kronrod on the resulting one-dimensional smooth integrand. Regions
// that leave a coordinate unconstrained collapse to univariate CDFs exactly.

double bvn_rect_cov(const Rect2& r, const Eigen::Vector2d& mu, const Cov2& cov);
double bvt_rect_cov(const Rect2& r, const Eigen::Vector2d& mu, const Cov2& cov, double nu);

double bvn_rect(const Rect2& r, const Eigen::Vector2d& mu, const BivariateScale& scale);
double bvt_rect(const Rect2& r, const Eigen::Vector2d& mu, const BivariateScale& scale, double nu);

/// ln of the rectangle probabilities. Exact (via univariate log-CDF kernels)
/// when a coordinate is unconstrained -- the only case the likelihood needs;
/// otherwise the log of the linear-space value.
double log_bvn_rect(const Rect2& r, const Eigen::Vector2d& mu, const BivariateScale& scale);
double log_bvt_rect(const Rect2& r, const Eigen::Vector2d& mu, const BivariateScale& scale, double nu);

}  // namespace hsel
