#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>

#include "hsel/dataset.hpp"
#include "hsel/errors.hpp"

namespace hsel {

/// Model parameters. nu = +infinity selects the normal-error model; a finite
/// nu selects the t-error model.
struct SlParams {
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;
  double sigma2 = 1;
  double rho = 0;
  double nu = std::numeric_limits<double>::infinity();

  bool normal() const { return std::isinf(nu); }
  double sigma() const { return std::sqrt(sigma2); }
  int p() const { return static_cast<int>(beta.size()); }
  int q() const { return static_cast<int>(gamma.size()); }

  void validate() const {
    if (!(sigma2 > 0) || !std::isfinite(sigma2)) throw domain_error("sigma2 must be positive");
    if (!(std::abs(rho) < 1)) throw domain_error("|rho| must be < 1");
    if (!(nu > 0)) throw domain_error("nu must be positive");
    if (!beta.allFinite() || !gamma.allFinite()) throw domain_error("coefficients must be finite");
  }
};

/// The M-step coordinates psi = sigma^2 (1 - rho^2), rho* = rho sigma.
struct TransformedParams {
  double psi = 1;
  double rho_star = 0;

  static TransformedParams from(const SlParams& p) {
    return {p.sigma2 * (1 - p.rho * p.rho), p.rho * p.sigma()};
  }
  /// Recovers (sigma2, rho); psi > 0 keeps |rho| < 1 automatically.
  void recover(double* sigma2, double* rho) const {
    if (!(psi > 0)) throw domain_error("psi must be positive");
    *sigma2 = psi + rho_star * rho_star;
    *rho = rho_star / std::sqrt(*sigma2);
  }
};

/// Parameters of Y2 | Y1 = v1 in the normal model: N(mu_c, sigma2_c).
struct CondNormal {
  double mu_c;
  double sigma2_c;
};

/// Parameters of Y2 | Y1 = v1 in the t model: t(mu_t, sigma2_t, nu + 1), plus
/// the squared standardized residual delta of the conditioning observation.
struct CondT {
  double mu_t;
  double sigma2_t;
  double delta;
};

CondNormal conditional_normal(const SlParams& params, const Eigen::Ref<const Eigen::VectorXd>& x_i,
                              const Eigen::Ref<const Eigen::VectorXd>& w_i, double v1);
CondT conditional_t(const SlParams& params, const Eigen::Ref<const Eigen::VectorXd>& x_i,
                    const Eigen::Ref<const Eigen::VectorXd>& w_i, double v1);

/// Observed-data log-likelihoods. Evaluated in log space throughout; a
/// non-finite row contribution raises numerical_underflow_error carrying the
/// row index.
double loglik_sln(const SlParams& params, const Dataset& data);
double loglik_slt(const SlParams& params, const Dataset& data);

/// Dispatches on params.normal().
double loglik(const SlParams& params, const Dataset& data);

}  // namespace hsel
