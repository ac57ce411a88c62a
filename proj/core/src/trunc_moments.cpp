#include "hsel/trunc_moments.hpp"

#include <algorithm>
#include <cmath>

#include "hsel/quadrature.hpp"

namespace hsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDegenerateMass = 1e-300;
constexpr double kFallbackMass = 1e-12;

void check_mass(double alpha) {
  if (!(alpha >= kDegenerateMass))
    throw degenerate_truncation_error("truncation region carries no mass under the parent law");
}

// ---- univariate normal -----------------------------------------------------

TruncMoments1 tn1_std(double a, double b) {
  double alpha = norm_interval(a, b);
  check_mass(alpha);
  double pa = std::isfinite(a) ? norm_pdf(a) : 0.0;
  double pb = std::isfinite(b) ? norm_pdf(b) : 0.0;
  double apa = std::isfinite(a) ? a * pa : 0.0;  // a pdf(a) -> 0 at -inf
  double bpb = std::isfinite(b) ? b * pb : 0.0;
  TruncMoments1 m;
  m.m1 = (pa - pb) / alpha;
  m.m2 = 1.0 + (apa - bpb) / alpha;  // E[Z^2 | a<=Z<=b]
  return m;
}

// ---- univariate t ----------------------------------------------------------

// log normalization of the standard t density with dof nu.
double t_lognorm(double nu) {
  return lgamma_diff(0.5 * nu, 0.5) - 0.5 * std::log(nu) - 0.57236494292470008707;
}

// (1 + c^2/B)^(-e/2), in logs; 0 at +-inf.
double pow_kernel(double c, double B, double e) {
  if (!std::isfinite(c)) return 0.0;
  return std::exp(-0.5 * e * std::log1p(c * c / B));
}

// standardized truncated-t moments over [a, b], closed form; requires nu > 2
// when the region is unbounded, and nu > 2 for the m2 volume term in general.
TruncMoments1 tt1_std_closed(double a, double b, double nu) {
  double alpha = t_interval_std(a, b, nu);
  check_mass(alpha);
  double cnu = std::exp(t_lognorm(nu));
  double ga = pow_kernel(a, nu, nu - 1);
  double gb = pow_kernel(b, nu, nu - 1);
  double s1 = (nu / (nu - 1)) * cnu * (ga - gb);  // E[Z 1]
  // E[Z^2 1] = nu/(nu-1) C [a G(a) - b G(b) + int G]
  double aga = std::isfinite(a) ? a * ga : 0.0;
  double bgb = std::isfinite(b) ? b * gb : 0.0;
  double sstar = std::sqrt(nu / (nu - 2));
  double kstar = std::exp(t_lognorm(nu - 2)) / sstar;
  double intg = t_interval_std(a / sstar, b / sstar, nu - 2) / kstar;
  double s2 = (nu / (nu - 1)) * cnu * (aga - bgb + intg);
  return {s1 / alpha, s2 / alpha};
}

TruncMoments1 tt1_std_quad(double a, double b, double nu) {
  // bounded regions only; adaptive quadrature of the raw integrands
  auto pdf = [nu](double z) { return t_pdf_std(z, nu); };
  double alpha = integrate(pdf, a, b, 1e-14).value;
  check_mass(alpha);
  double tol = std::max(1e-16, alpha * 1e-12);
  double s1 = integrate([&](double z) { return z * pdf(z); }, a, b, tol).value;
  double s2 = integrate([&](double z) { return z * z * pdf(z); }, a, b, tol).value;
  return {s1 / alpha, s2 / alpha};
}

// ---- bivariate common pieces -----------------------------------------------

struct Rect2Std {
  double lo[2], hi[2];
};

bool rect_bounded(const Rect2Std& r) {
  return std::isfinite(r.lo[0]) && std::isfinite(r.hi[0]) && std::isfinite(r.lo[1]) &&
         std::isfinite(r.hi[1]);
}

Rect2 center_rect(const Rect2& region, const Eigen::Vector2d& mu) {
  Rect2 c = region;
  c.x1.lo -= mu[0];
  c.x1.hi -= mu[0];
  c.x2.lo -= mu[1];
  c.x2.hi -= mu[1];
  return c;
}

Eigen::Matrix2d as_matrix(const Cov2& s) {
  Eigen::Matrix2d m;
  m << s.s11, s.s12, s.s12, s.s22;
  return m;
}

TruncMoments2 uncenter(const Eigen::Vector2d& mu, const Eigen::Vector2d& m1z,
                       const Eigen::Matrix2d& m2z) {
  TruncMoments2 out;
  out.m1 = mu + m1z;
  out.m2 = m2z + m1z * mu.transpose() + mu * m1z.transpose() + mu * mu.transpose();
  out.m2 = 0.5 * (out.m2 + out.m2.transpose()).eval();
  return out;
}

// ---- bivariate normal, closed form (centered) --------------------------------

TruncMoments2 tn2_closed(const Eigen::Vector2d& mu, const Cov2& cov, const Rect2Std& r,
                         double alpha) {
  Eigen::Matrix2d S = as_matrix(cov);
  Eigen::Vector2d q = Eigen::Vector2d::Zero();
  Eigen::Matrix2d R = Eigen::Matrix2d::Zero();
  for (int k = 0; k < 2; ++k) {
    int j = 1 - k;
    double skk = S(k, k);
    double s2cond = S(j, j) - S(j, k) * S(j, k) / skk;
    double scond = std::sqrt(std::max(s2cond, 0.0));
    for (int side = 0; side < 2; ++side) {
      double c = side == 0 ? r.lo[k] : r.hi[k];
      if (!std::isfinite(c)) continue;
      double sign = side == 0 ? 1.0 : -1.0;
      double pdf_k = norm_pdf(c, 0, skk);
      double mj = S(j, k) / skk * c;
      double zl = (r.lo[j] - mj) / scond, zu = (r.hi[j] - mj) / scond;
      double pc = norm_interval(zl, zu);
      double pl = std::isfinite(zl) ? norm_pdf(zl) : 0.0;
      double pu = std::isfinite(zu) ? norm_pdf(zu) : 0.0;
      double ec = mj * pc + scond * (pl - pu);  // E[Z_j 1 | Z_k = c]
      q[k] += sign * pdf_k * pc;
      R(k, k) += sign * c * pdf_k * pc;
      R(j, k) += sign * pdf_k * ec;
    }
  }
  Eigen::Vector2d m1z = S * q / alpha;
  Eigen::Matrix2d m2z = S + (R * S) / alpha;
  m2z = 0.5 * (m2z + m2z.transpose()).eval();
  return uncenter(mu, m1z, m2z);
}

// ---- bivariate t, closed form (centered); requires nu > 2 --------------------

TruncMoments2 tt2_closed(const Eigen::Vector2d& mu, const Cov2& cov, double nu,
                         const Rect2Std& r, double alpha) {
  Eigen::Matrix2d S = as_matrix(cov);
  double det = cov.det();
  double C = std::exp(lgamma_diff(0.5 * nu, 1.0)) / (nu * M_PI * std::sqrt(det));
  Eigen::Vector2d q = Eigen::Vector2d::Zero();
  Eigen::Matrix2d D = Eigen::Matrix2d::Zero();
  for (int k = 0; k < 2; ++k) {
    int j = 1 - k;
    double skk = S(k, k);
    double s2cond = S(j, j) - S(j, k) * S(j, k) / skk;
    for (int side = 0; side < 2; ++side) {
      double c = side == 0 ? r.lo[k] : r.hi[k];
      if (!std::isfinite(c)) continue;
      double sign = side == 0 ? 1.0 : -1.0;
      double A = 1 + c * c / (nu * skk);
      double apow = std::exp(-0.5 * nu * std::log1p(c * c / (nu * skk)));
      double mj = S(j, k) / skk * c;
      double st2 = nu * s2cond * A / (nu - 1);
      double st = std::sqrt(st2);
      double K = std::exp(t_lognorm(nu - 1)) / st;
      double zl = (r.lo[j] - mj) / st, zu = (r.hi[j] - mj) / st;
      double tdiff = t_interval_std(zl, zu, nu - 1);
      double hk = apow * tdiff / K;
      q[k] += sign * hk;
      D(k, k) += sign * c * hk;
      // edge integral of z_j H: m_j Tdiff/K plus the centered antiderivative
      double B = nu * A * s2cond;
      double jl = pow_kernel(r.lo[j] - mj, B, nu - 2);
      double ju = pow_kernel(r.hi[j] - mj, B, nu - 2);
      double J = B / (nu - 2) * (jl - ju);
      D(j, k) += sign * apow * (mj * tdiff / K + J);
    }
  }
  // volume term: integral of the H kernel over the rectangle
  Cov2 covss = cov.scaled(nu / (nu - 2));
  double css = std::exp(lgamma_diff(0.5 * (nu - 2), 1.0)) /
               ((nu - 2) * M_PI * std::sqrt(covss.det()));
  Rect2 rr;
  rr.x1 = {r.lo[0], r.hi[0]};
  rr.x2 = {r.lo[1], r.hi[1]};
  double ih = bvt_rect_cov(rr, Eigen::Vector2d::Zero(), covss, nu - 2) / css;
  Eigen::Vector2d m1z = C * (S * q) / alpha;
  Eigen::Matrix2d m2z = C * (ih * S + D * S) / alpha;
  m2z = 0.5 * (m2z + m2z.transpose()).eval();
  return uncenter(mu, m1z, m2z);
}

// ---- quadrature fallback (centered): conditional 1-D reduction ---------------
//
// Integrates over z_k the marginal density times closed-form conditional
// truncated moments of z_j. Used for tiny truncation mass and for bounded
// regions where the closed form's dof shifts are unavailable (t with nu <= 2).

struct CondReduce {
  // returns (alpha, m1, m2raw) in centered coordinates
  double alpha;
  Eigen::Vector2d m1;
  Eigen::Matrix2d m2;
};

template <typename MargPdf, typename CondMoments, typename CondProb>
CondReduce reduce_1d(double lo, double hi, double scale, MargPdf marg, CondProb cprob,
                     CondMoments cmom) {
  // integrand terms: alpha, E[z2 1], E[z2^2 1], E[z1 z2-cond 1] etc. with
  // outer variable z2 (index 1) and inner z1 (index 0).
  std::vector<double> brk = tail_breakpoints(lo, hi, 0.0, scale);
  auto integ = [&](std::function<double(double)> f, double tol) {
    return integrate_segmented(f, lo, hi, brk, tol).value;
  };
  auto fa = [&](double t) { return marg(t) * cprob(t); };
  double alpha = integ(fa, 1e-15);
  check_mass(alpha);
  double tol = std::max(1e-16, alpha * 1e-11);
  double m2o = integ([&](double t) { return t * fa(t); }, tol);
  double m22 = integ([&](double t) { return t * t * fa(t); }, tol);
  double m1i = integ([&](double t) { return marg(t) * cmom(t).first; }, tol);
  double m11 = integ([&](double t) { return marg(t) * cmom(t).second; }, tol);
  double m12 = integ([&](double t) { return t * marg(t) * cmom(t).first; }, tol);
  CondReduce out;
  out.alpha = alpha;
  out.m1 << m1i / alpha, m2o / alpha;
  out.m2 << m11 / alpha, m12 / alpha, m12 / alpha, m22 / alpha;
  return out;
}

TruncMoments2 tn2_quad(const Eigen::Vector2d& mu, const Cov2& cov, const Rect2Std& r) {
  double s2 = std::sqrt(cov.s22);
  double beta = cov.s12 / cov.s22;                       // regression of z1 on z2
  double s2cond = cov.s11 - cov.s12 * cov.s12 / cov.s22;  // Schur complement
  double scond = std::sqrt(std::max(s2cond, 0.0));
  auto marg = [&](double t) { return norm_pdf(t, 0, cov.s22); };
  auto cprob = [&](double t) {
    double m = beta * t;
    return norm_interval((r.lo[0] - m) / scond, (r.hi[0] - m) / scond);
  };
  auto cmom = [&](double t) {
    double m = beta * t;
    double zl = (r.lo[0] - m) / scond, zu = (r.hi[0] - m) / scond;
    double pc = norm_interval(zl, zu);
    double pl = std::isfinite(zl) ? norm_pdf(zl) : 0.0;
    double pu = std::isfinite(zu) ? norm_pdf(zu) : 0.0;
    double e1 = m * pc + scond * (pl - pu);
    double zlpl = std::isfinite(zl) ? zl * pl : 0.0;
    double zupu = std::isfinite(zu) ? zu * pu : 0.0;
    double ez2c = pc + (zlpl - zupu);  // E[Zc^2 1] standardized
    double e2 = m * m * pc + 2 * m * scond * (pl - pu) + s2cond * ez2c;
    return std::make_pair(e1, e2);
  };
  double lo = std::max(r.lo[1], -8.6 * s2), hi = std::min(r.hi[1], 8.6 * s2);
  if (!(lo < hi)) throw degenerate_truncation_error("truncation mass below double range");
  CondReduce cr = reduce_1d(lo, hi, std::sqrt(cov.s22), marg, cprob, cmom);
  return uncenter(mu, cr.m1, cr.m2);
}

TruncMoments2 tt2_quad(const Eigen::Vector2d& mu, const Cov2& cov, double nu,
                       const Rect2Std& r) {
  double s2 = std::sqrt(cov.s22);
  double beta = cov.s12 / cov.s22;
  double s2cond_base = cov.s11 - cov.s12 * cov.s12 / cov.s22;
  auto marg = [&](double t) { return t_pdf_std(t / s2, nu) / s2; };
  auto cond_scale = [&](double t) {
    double d1 = t * t / cov.s22;
    return std::sqrt((nu + d1) / (nu + 1) * s2cond_base);
  };
  auto cprob = [&](double t) {
    double m = beta * t, sc = cond_scale(t);
    return t_interval_std((r.lo[0] - m) / sc, (r.hi[0] - m) / sc, nu + 1);
  };
  auto cmom = [&](double t) {
    double m = beta * t, sc = cond_scale(t);
    double zl = (r.lo[0] - m) / sc, zu = (r.hi[0] - m) / sc;
    // conditional truncated-t (dof nu+1) unnormalized moments via the
    // standardized closed forms when legal, else nested quadrature
    double a = zl, b = zu, dof = nu + 1;
    double pc = t_interval_std(a, b, dof);
    if (pc <= 0) return std::make_pair(0.0, 0.0);
    TruncMoments1 tm;
    bool bounded = std::isfinite(a) && std::isfinite(b);
    if (dof > 2)
      tm = tt1_std_closed(a, b, dof);
    else if (bounded)
      tm = tt1_std_quad(a, b, dof);
    else
      throw moment_undefined_error("conditional truncated-t moment undefined for nu <= 1");
    double e1 = (m + sc * tm.m1) * pc;
    double e2 = (m * m + 2 * m * sc * tm.m1 + sc * sc * tm.m2) * pc;
    return std::make_pair(e1, e2);
  };
  double clip = 1e-15;
  double lo = std::max(r.lo[1], s2 * t_quantile_std(clip, nu));
  double hi = std::min(r.hi[1], s2 * t_quantile_std(1 - clip, nu));
  if (!(lo < hi)) throw degenerate_truncation_error("truncation mass below double range");
  CondReduce cr = reduce_1d(lo, hi, std::sqrt(cov.s22), marg, cprob, cmom);
  return uncenter(mu, cr.m1, cr.m2);
}

}  // namespace

// ---- public operations -------------------------------------------------------

TruncMoments1 tn1_moments(double mu, double sigma2, const Interval& region) {
  if (!(sigma2 > 0) || !std::isfinite(sigma2)) throw domain_error("tn1_moments: sigma2 must be positive");
  region.validate();
  double s = std::sqrt(sigma2);
  TruncMoments1 z = tn1_std((region.lo - mu) / s, (region.hi - mu) / s);
  return {mu + s * z.m1, sigma2 * z.m2 + 2 * mu * s * z.m1 + mu * mu};
}

TruncMoments1 tt1_moments(const UnivariateT& dist, const Interval& region) {
  dist.validate();
  region.validate();
  double s = std::sqrt(dist.sigma2);
  double a = (region.lo - dist.mu) / s, b = (region.hi - dist.mu) / s;
  bool bounded = std::isfinite(a) && std::isfinite(b);
  TruncMoments1 z;
  if (dist.nu > 2) {
    z = tt1_std_closed(a, b, dist.nu);
  } else if (bounded) {
    z = tt1_std_quad(a, b, dist.nu);
  } else {
    throw moment_undefined_error(
        "truncated-t moments on an unbounded region require nu > 2 (m1 alone nu > 1)");
  }
  return {dist.mu + s * z.m1, dist.sigma2 * z.m2 + 2 * dist.mu * s * z.m1 + dist.mu * dist.mu};
}

TruncMoments2 tn2_moments_cov(const Eigen::Vector2d& mu, const Cov2& cov, const Rect2& region) {
  cov.validate();
  region.validate();
  Rect2 cr = center_rect(region, mu);
  Rect2Std r{{cr.x1.lo, cr.x2.lo}, {cr.x1.hi, cr.x2.hi}};
  double alpha = bvn_rect_cov(cr, Eigen::Vector2d::Zero(), cov);
  check_mass(alpha);
  if (alpha < kFallbackMass) return tn2_quad(mu, cov, r);
  return tn2_closed(mu, cov, r, alpha);
}

TruncMoments2 tt2_moments_cov(const Eigen::Vector2d& mu, const Cov2& cov, double nu,
                              const Rect2& region) {
  cov.validate();
  region.validate();
  if (!(nu > 0)) throw domain_error("tt2_moments: nu must be positive");
  Rect2 cr = center_rect(region, mu);
  Rect2Std r{{cr.x1.lo, cr.x2.lo}, {cr.x1.hi, cr.x2.hi}};
  bool bounded = rect_bounded(r);
  if (nu <= 2 && !bounded)
    throw moment_undefined_error("truncated-t moments on an unbounded region require nu > 2");
  double alpha = bvt_rect_cov(cr, Eigen::Vector2d::Zero(), cov, nu);
  check_mass(alpha);
  if (nu <= 2 || alpha < kFallbackMass) return tt2_quad(mu, cov, nu, r);
  return tt2_closed(mu, cov, nu, r, alpha);
}

TruncMoments2 tn2_moments(const Eigen::Vector2d& mu, const BivariateScale& scale,
                          const Rect2& region) {
  scale.validate();
  return tn2_moments_cov(mu, Cov2::from(scale), region);
}

TruncMoments2 tt2_moments(const Eigen::Vector2d& mu, const BivariateScale& scale, double nu,
                          const Rect2& region) {
  scale.validate();
  return tt2_moments_cov(mu, Cov2::from(scale), nu, region);
}

MomentWeights prop2_weight(int p, double nu, double r) {
  if (!(nu > 0)) throw domain_error("prop2_weight: nu must be positive");
  if (!(nu + 2 * r > 0)) throw domain_error("prop2_weight requires nu + 2r > 0");
  MomentWeights w;
  // c_p = ((nu+p)/nu)^r Gamma((p+nu)/2) Gamma((nu+2r)/2) / (Gamma(nu/2) Gamma((p+nu+2r)/2))
  double lg = lgamma_diff(0.5 * nu, 0.5 * p) - lgamma_diff(0.5 * (nu + 2 * r), 0.5 * p);
  w.c_p = std::exp(r * std::log1p(static_cast<double>(p) / nu) + lg);
  w.d_p = 1;
  w.sigma_star_factor = nu / (nu + 2 * r);
  return w;
}

MomentWeights prop3_weight(int p, int p1, double nu, double r) {
  if (!(nu > 0)) throw domain_error("prop3_weight: nu must be positive");
  if (p1 <= 0 || p1 >= p) throw domain_error("prop3_weight requires 0 < p1 < p");
  if (!(nu + p1 + 2 * r > 0)) throw domain_error("prop3_weight requires nu + p1 + 2r > 0");
  MomentWeights w;
  // d_p = (nu+p)^r Gamma((p+nu)/2) Gamma((p1+nu+2r)/2) / (Gamma((p1+nu)/2) Gamma((p+nu+2r)/2))
  double p2 = 0.5 * (p - p1);
  double lg = lgamma_diff(0.5 * (p1 + nu), p2) - lgamma_diff(0.5 * (p1 + nu + 2 * r), p2);
  w.d_p = std::exp(r * std::log(nu + p) + lg);
  w.c_p = 1;
  w.sigma_star_factor = nu / (nu + 2 * r);
  return w;
}

}  // namespace hsel
