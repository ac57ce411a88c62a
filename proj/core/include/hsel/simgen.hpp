#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hsel/dataset.hpp"
#include "hsel/em.hpp"

namespace hsel {

enum class DgpFamily { normal, t, slash };

/// Simulation design: w_i = (1, U(-1,1), N(0,1)), x_i = (1, w_i1); errors
/// bivariate with dispersion [[sigma2, rho*sigma],[rho*sigma, 1]] under the
/// chosen family. The selection intercept is either given or calibrated so
/// that P(Y2 <= 0) hits target_missing on average.
struct DgpConfig {
  DgpFamily family = DgpFamily::normal;
  double nu = 4;  // t / slash tail parameter
  long n = 500;
  Eigen::Vector2d beta{1.0, 0.5};
  double gamma1 = 0.3, gamma2 = -0.5;
  std::optional<double> gamma0;  // calibrated from target_missing when absent
  double target_missing = 0.25;
  double sigma2 = 1.0;
  double rho = 0.6;
  uint64_t seed = 1;

  void validate() const;
  double resolved_gamma0() const;
};

Dataset generate(const DgpConfig& config);

/// gamma0 such that the marginal selection-error law puts target_missing mass
/// below -gamma0: the negative of the family's target_missing quantile.
double calibrate_intercept(DgpFamily family, double nu, double target_missing);

/// Marginal CDF of the unit-scale slash law (normal mixed over U ~ Beta(nu,1)).
double slash_cdf(double x, double nu);

/// Monte Carlo study summary for one fitted family, Table-style: one row per
/// parameter (beta0, beta1, gamma..., sigma2, rho, nu).
struct McSummary {
  std::string fit_label;
  std::vector<std::string> names;
  Eigen::VectorXd truth;
  Eigen::VectorXd mean_est;
  Eigen::VectorXd mean_se;   // NaN where no SE is produced (nu)
  Eigen::VectorXd mc_sd;
  double mean_aic = 0, mean_bic = 0;
  int requested = 0;
  int converged = 0;
  int failures = 0;  // non-converged or errored replicates, excluded from means
};

/// One replicate-level record for boxplot-style long output.
struct McRecord {
  int replicate;
  std::string fit_label;
  std::string param;
  double estimate;
  double centered;  // estimate - truth
};

std::vector<McSummary> mc_study(const DgpConfig& config, const std::vector<FitOptions>& fits,
                                int replicates, int parallelism,
                                std::vector<McRecord>* long_records = nullptr);

}  // namespace hsel
