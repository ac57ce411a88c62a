#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "hsel/dataset.hpp"
#include "hsel/model.hpp"

namespace hsel {

enum class Family { normal, t };
enum class NuMode { fixed, estimate };

/// Per-observation conditional expectations. For the normal model uhat == 1,
/// uy == y1hat and uyy == y2hat; the t model carries the U-weighted versions.
struct EStepRecord {
  Eigen::Vector2d y1hat = Eigen::Vector2d::Zero();   // E[Y | V, C]
  Eigen::Matrix2d y2hat = Eigen::Matrix2d::Zero();   // E[Y Y^T | V, C]
  double uhat = 1;                                   // E[U | V, C]
  Eigen::Vector2d uy = Eigen::Vector2d::Zero();      // E[U Y | V, C]
  Eigen::Matrix2d uyy = Eigen::Matrix2d::Zero();     // E[U Y Y^T | V, C]
};

struct FitOptions {
  Family family = Family::normal;
  NuMode nu_mode = NuMode::estimate;
  double nu_value = 10;          // fixed-nu value (family t, nu_mode fixed)
  double tol = 1e-6;             // relative log-likelihood stopping rule
  double tol_abs = 0;            // optional absolute-change rule (0 = disabled)
  int max_iter = 500;
  double nu_lo = 2.01, nu_hi = 200;  // profile search interval
  std::optional<SlParams> init;  // two-step initialization when absent
  int threads = 1;
  int cml_every = 1;             // profile nu every m iterations
  bool printed_weighting = false;  // debug: literal Sigma weights in the GLS step
  bool compute_se = true;

  void validate() const {
    if (!(tol > 0)) throw domain_error("tol must be positive");
    if (max_iter < 0) throw domain_error("max_iter must be nonnegative");
    if (!(nu_lo > 2) || !(nu_hi > nu_lo)) throw domain_error("nu bounds must satisfy 2 < lo < hi");
    if (cml_every < 1) throw domain_error("cml_every must be >= 1");
  }
};

struct FitResult {
  SlParams params;
  Eigen::VectorXd se;            // (beta..., gamma..., sigma, rho); NaN = unavailable
  bool se_reliable = false;
  double se_condition = 0;       // condition number of the information matrix
  std::vector<double> loglik_trace;  // includes the initial value
  int iterations = 0;
  bool converged = false;
  bool nu_at_bound = false;
  double aic = 0, bic = 0;
  int k_params = 0;
  std::vector<std::string> warnings;

  double loglik() const { return loglik_trace.empty() ? 0 : loglik_trace.back(); }
  /// Delta-method standard error on the sigma^2 scale.
  double se_sigma2() const {
    int i = static_cast<int>(se.size()) - 2;
    return 2 * params.sigma() * se[i];
  }
};

std::vector<EStepRecord> estep_sln(const SlParams& params, const Dataset& data, int threads = 1);
std::vector<EStepRecord> estep_slt(const SlParams& params, const Dataset& data, int threads = 1);

/// Closed-form conditional M-step in (beta_c, psi, rho*): GLS update of the
/// coefficients at the current Sigma, then the joint (psi, rho*) maximizer at
/// the fresh mean. nu passes through untouched.
SlParams mstep_sln(const std::vector<EStepRecord>& records, const Dataset& data,
                   const SlParams& current, bool printed_weighting = false);
SlParams mstep_slt(const std::vector<EStepRecord>& records, const Dataset& data,
                   const SlParams& current, bool printed_weighting = false);

/// Profile maximization of the observed t log-likelihood over nu on [lo, hi]
/// (Brent on log nu). warm_start narrows the initial bracket; at_bound is set
/// when the maximizer lands at hi (the effectively-normal regime).
double cml_step_nu(const SlParams& params, const Dataset& data, double lo, double hi,
                   double warm_start = 0, bool* at_bound = nullptr);

FitResult fit(const Dataset& data, const FitOptions& options);

}  // namespace hsel
