#pragma once

#include <Eigen/Core>
#include <vector>

#include "hsel/dataset.hpp"
#include "hsel/model.hpp"

namespace hsel {

struct ProbitFit {
  Eigen::VectorXd gamma;
  double loglik = 0;
  int iterations = 0;
  bool converged = false;
};

/// Probit MLE by Newton iterations with step halving.
ProbitFit probit_fit(const Eigen::MatrixXd& w, const std::vector<uint8_t>& c);

/// Classic two-step estimator: probit for gamma, then least squares of the
/// observed outcomes on [x, inverse Mills ratio] for (beta, rho*), with the
/// standard variance correction to recover (sigma2, rho). Returns normal-model
/// params (nu infinite); used standalone and as the EM initializer.
SlParams heckman_two_step(const Dataset& data);

}  // namespace hsel
