#pragma once

#include <Eigen/Core>

#include "hsel/interval.hpp"
#include "hsel/special.hpp"

namespace hsel {

/// First and second raw moments of a scalar truncated law.
struct TruncMoments1 {
  double m1 = 0;
  double m2 = 0;
};

/// First moment vector and second raw-moment matrix of a doubly truncated
/// bivariate law: m1 = E[W], m2 = E[W W^T].
struct TruncMoments2 {
  Eigen::Vector2d m1 = Eigen::Vector2d::Zero();
  Eigen::Matrix2d m2 = Eigen::Matrix2d::Identity();
};

/// Constants of the weighted-moment identities for the truncated t:
///   E[((nu+p)/(nu+delta(Y)))^r Y^(k)]        = c_p * T-ratio * E[W^(k)]
///   E[((nu+p)/(nu+delta(Y)))^r Y_2^(k) | Y1] = d_p (nu+delta_1)^{-r} * T-ratio * E[W_2^(k)]
/// sigma_star_factor scales the parent covariance: Sigma* = nu Sigma/(nu+2r).
struct MomentWeights {
  double c_p = 1;
  double d_p = 1;
  double sigma_star_factor = 1;
};

/// Truncated-normal moments, exact closed form.
TruncMoments1 tn1_moments(double mu, double sigma2, const Interval& region);

/// Truncated-t moments. Closed form when the moments exist in closed form
/// (unbounded regions need nu > 2 for the pair); bounded regions with small nu
/// fall back to adaptive quadrature.
TruncMoments1 tt1_moments(const UnivariateT& dist, const Interval& region);

TruncMoments2 tn2_moments(const Eigen::Vector2d& mu, const BivariateScale& scale,
                          const Rect2& region);
TruncMoments2 tt2_moments(const Eigen::Vector2d& mu, const BivariateScale& scale, double nu,
                          const Rect2& region);

/// General-scale variants (the E-step feeds scaled covariances nu Sigma/(nu+2)
/// and conditional Schur complements through here).
TruncMoments2 tn2_moments_cov(const Eigen::Vector2d& mu, const Cov2& cov, const Rect2& region);
TruncMoments2 tt2_moments_cov(const Eigen::Vector2d& mu, const Cov2& cov, double nu,
                              const Rect2& region);

MomentWeights prop2_weight(int p, double nu, double r);
MomentWeights prop3_weight(int p, int p1, double nu, double r);

}  // namespace hsel
