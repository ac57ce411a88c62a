#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "hsel/dataset.hpp"
#include "hsel/model.hpp"

namespace hsel {

struct EStepRecord;

/// Per-observation score in the (beta_c, sigma, rho) parameterization.
struct ScoreVector {
  Eigen::VectorXd s_beta_c;
  double s_sigma = 0;
  double s_rho = 0;

  Eigen::VectorXd flat() const {
    Eigen::VectorXd v(s_beta_c.size() + 2);
    v << s_beta_c, s_sigma, s_rho;
    return v;
  }
};

struct InfoMatrix {
  Eigen::MatrixXd m;
};

std::vector<ScoreVector> score_sln(const SlParams& params, const Dataset& data,
                                   const std::vector<EStepRecord>& records);
std::vector<ScoreVector> score_slt(const SlParams& params, const Dataset& data,
                                   const std::vector<EStepRecord>& records);

/// Empirical information: sum of score outer products (the sum-of-scores term
/// vanishes at the ML estimate).
InfoMatrix empirical_info(const std::vector<ScoreVector>& scores);

/// sqrt of the diagonal of the inverse information. Coordinates tied to a
/// numerically null direction come back NaN; reliable reports whether the
/// matrix passed the conditioning check (cond <= 1e12).
Eigen::VectorXd standard_errors(const InfoMatrix& info, bool* reliable = nullptr,
                                double* condition = nullptr);

/// (aic, bic) = (-2 ll + 2k, -2 ll + k ln n)
std::pair<double, double> information_criteria(double loglik, int k, long n);

}  // namespace hsel
