#include <algorithm>
#include <cmath>

#include "hsel/quadrature.hpp"
#include "hsel/special.hpp"

namespace hsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Standardized rectangle: bounds for (Z1, Z2) with unit marginals and
// correlation r.
struct StdRect {
  double a1, b1, a2, b2, r;
};

StdRect standardize(const Rect2& rect, const Eigen::Vector2d& mu, const Cov2& cov) {
  double s1 = std::sqrt(cov.s11), s2 = std::sqrt(cov.s22);
  return {(rect.x1.lo - mu[0]) / s1, (rect.x1.hi - mu[0]) / s1,
          (rect.x2.lo - mu[1]) / s2, (rect.x2.hi - mu[1]) / s2, cov.corr()};
}

bool whole_line(double a, double b) { return a == -kInf && b == kInf; }

// P(a <= Z <= b) integrand factory for the normal case: condition on z1.
// Z2 | Z1 = x ~ N(r x, 1 - r^2).
double bvn_by_conditioning(const StdRect& s, double abs_tol) {
  const double sc = std::sqrt(1 - s.r * s.r);
  auto f = [&](double x) {
    double m = s.r * x;
    return norm_pdf(x) * norm_interval((s.a2 - m) / sc, (s.b2 - m) / sc);
  };
  // clip: truncated tails carry at most the marginal mass beyond +-8.6 (~2e-18)
  double lo = std::max(s.a1, -8.6), hi = std::min(s.b1, 8.6);
  if (!(lo < hi)) {
    // rectangle entirely in a deep marginal tail; mass below tolerance
    return norm_interval(s.a1, s.b1);
  }
  QuadResult q = integrate(f, lo, hi, abs_tol);
  return std::min(1.0, std::max(0.0, q.value));
}

// Z2 | Z1 = x ~ t(r x, ((nu + x^2)/(nu + 1)) (1 - r^2), nu + 1).
double bvt_by_conditioning(const StdRect& s, double nu, double abs_tol) {
  const double om_r2 = 1 - s.r * s.r;
  auto f = [&](double x) {
    double m = s.r * x;
    double sc = std::sqrt((nu + x * x) / (nu + 1) * om_r2);
    return t_pdf_std(x, nu) * t_interval_std((s.a2 - m) / sc, (s.b2 - m) / sc, nu + 1);
  };
  double clip = 1e-14;
  double lo = s.a1, hi = s.b1;
  if (lo == -kInf) lo = t_quantile_std(clip, nu);
  else lo = std::max(lo, t_quantile_std(clip, nu));
  if (hi == kInf) hi = t_quantile_std(1 - clip, nu);
  else hi = std::min(hi, t_quantile_std(1 - clip, nu));
  if (!(lo < hi)) return t_interval_std(s.a1, s.b1, nu);
  // heavy tails at small dof make the clipped range astronomically wide
  QuadResult q = integrate_segmented(f, lo, hi, tail_breakpoints(lo, hi, 0.0, 1.0), abs_tol);
  return std::min(1.0, std::max(0.0, q.value));
}

}  // namespace

namespace {
// NaN bounds are errors; empty or zero-width rectangles carry zero mass.
bool check_rect_degenerate(const Rect2& r) {
  if (std::isnan(r.x1.lo) || std::isnan(r.x1.hi) || std::isnan(r.x2.lo) || std::isnan(r.x2.hi))
    throw domain_error("rectangle bound is NaN");
  return r.x1.empty() || r.x2.empty();
}
}  // namespace

double bvn_rect_cov(const Rect2& rect, const Eigen::Vector2d& mu, const Cov2& cov) {
  cov.validate();
  if (check_rect_degenerate(rect)) return 0;
  StdRect s = standardize(rect, mu, cov);
  if (whole_line(s.a1, s.b1) && whole_line(s.a2, s.b2)) return 1;
  if (whole_line(s.a1, s.b1)) return norm_interval(s.a2, s.b2);
  if (whole_line(s.a2, s.b2)) return norm_interval(s.a1, s.b1);
  if (s.r == 0) return norm_interval(s.a1, s.b1) * norm_interval(s.a2, s.b2);
  return bvn_by_conditioning(s, 1e-13);
}

double bvt_rect_cov(const Rect2& rect, const Eigen::Vector2d& mu, const Cov2& cov, double nu) {
  cov.validate();
  if (!(nu > 0)) throw domain_error("bvt_rect: nu must be positive");
  if (check_rect_degenerate(rect)) return 0;
  StdRect s = standardize(rect, mu, cov);
  if (whole_line(s.a1, s.b1) && whole_line(s.a2, s.b2)) return 1;
  // one unconstrained coordinate: the marginal is univariate t(0, 1, nu)
  if (whole_line(s.a1, s.b1)) return t_interval_std(s.a2, s.b2, nu);
  if (whole_line(s.a2, s.b2)) return t_interval_std(s.a1, s.b1, nu);
  return bvt_by_conditioning(s, nu, 2.5e-11);
}

double bvn_rect(const Rect2& rect, const Eigen::Vector2d& mu, const BivariateScale& scale) {
  scale.validate();
  return bvn_rect_cov(rect, mu, Cov2::from(scale));
}

double bvt_rect(const Rect2& rect, const Eigen::Vector2d& mu, const BivariateScale& scale,
                double nu) {
  scale.validate();
  return bvt_rect_cov(rect, mu, Cov2::from(scale), nu);
}

double log_bvn_rect(const Rect2& rect, const Eigen::Vector2d& mu, const BivariateScale& scale) {
  scale.validate();
  if (check_rect_degenerate(rect)) return -kInf;
  Cov2 cov = Cov2::from(scale);
  StdRect s = standardize(rect, mu, cov);
  if (whole_line(s.a1, s.b1) && s.a2 == -kInf) return norm_logcdf(s.b2);
  if (whole_line(s.a1, s.b1) && s.b2 == kInf) return norm_logcdf(-s.a2);
  if (whole_line(s.a2, s.b2) && s.a1 == -kInf) return norm_logcdf(s.b1);
  if (whole_line(s.a2, s.b2) && s.b1 == kInf) return norm_logcdf(-s.a1);
  return std::log(bvn_rect_cov(rect, mu, cov));
}

double log_bvt_rect(const Rect2& rect, const Eigen::Vector2d& mu, const BivariateScale& scale,
                    double nu) {
  scale.validate();
  if (check_rect_degenerate(rect)) return -kInf;
  Cov2 cov = Cov2::from(scale);
  StdRect s = standardize(rect, mu, cov);
  if (whole_line(s.a1, s.b1) && s.a2 == -kInf) return t_logcdf_std(s.b2, nu);
  if (whole_line(s.a1, s.b1) && s.b2 == kInf) return t_logcdf_std(-s.a2, nu);
  if (whole_line(s.a2, s.b2) && s.a1 == -kInf) return t_logcdf_std(s.b1, nu);
  if (whole_line(s.a2, s.b2) && s.b1 == kInf) return t_logcdf_std(-s.a1, nu);
  return std::log(bvt_rect_cov(rect, mu, cov, nu));
}

}  // namespace hsel
