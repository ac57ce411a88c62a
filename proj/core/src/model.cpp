#include "hsel/model.hpp"

#include <cmath>
#include <string>

#include "hsel/special.hpp"

namespace hsel {

CondNormal conditional_normal(const SlParams& params, const Eigen::Ref<const Eigen::VectorXd>& x_i,
                              const Eigen::Ref<const Eigen::VectorXd>& w_i, double v1) {
  params.validate();
  double resid = v1 - x_i.dot(params.beta);
  return {w_i.dot(params.gamma) + params.rho / params.sigma() * resid,
          1 - params.rho * params.rho};
}

CondT conditional_t(const SlParams& params, const Eigen::Ref<const Eigen::VectorXd>& x_i,
                    const Eigen::Ref<const Eigen::VectorXd>& w_i, double v1) {
  params.validate();
  if (params.normal()) throw domain_error("conditional_t requires finite nu");
  double resid = v1 - x_i.dot(params.beta);
  double delta = resid * resid / params.sigma2;
  double nu = params.nu;
  return {w_i.dot(params.gamma) + params.rho / params.sigma() * resid,
          (nu + delta) / (nu + 1) * (1 - params.rho * params.rho), delta};
}

namespace {

void check_row(double term, long i) {
  if (!std::isfinite(term))
    throw numerical_underflow_error(
        "log-likelihood contribution is not finite at row " + std::to_string(i), i);
}

}  // namespace

double loglik_sln(const SlParams& params, const Dataset& data) {
  params.validate();
  double sum = 0;
  const double sigma_c = std::sqrt(1 - params.rho * params.rho);
  for (long i = 0; i < data.n(); ++i) {
    double eta = data.w().row(i).dot(params.gamma);
    double term;
    if (data.selected(i)) {
      double v = data.outcome(i);
      double resid = v - data.x().row(i).dot(params.beta);
      double mu_c = eta + params.rho / params.sigma() * resid;
      term = norm_logpdf(v, data.x().row(i).dot(params.beta), params.sigma2) +
             norm_logcdf(mu_c / sigma_c);
    } else {
      term = norm_logcdf(-eta);
    }
    check_row(term, i);
    sum += term;
  }
  return sum;
}

double loglik_slt(const SlParams& params, const Dataset& data) {
  params.validate();
  if (params.normal()) throw domain_error("loglik_slt requires finite nu");
  const double nu = params.nu;
  double sum = 0;
  for (long i = 0; i < data.n(); ++i) {
    double term;
    if (data.selected(i)) {
      double v = data.outcome(i);
      CondT ct = conditional_t(params, data.x().row(i), data.w().row(i), v);
      term = t_logpdf(v, {data.x().row(i).dot(params.beta), params.sigma2, nu}) +
             t_logcdf_std(ct.mu_t / std::sqrt(ct.sigma2_t), nu + 1);
    } else {
      double eta = data.w().row(i).dot(params.gamma);
      term = t_logcdf_std(-eta, nu);
    }
    check_row(term, i);
    sum += term;
  }
  return sum;
}

double loglik(const SlParams& params, const Dataset& data) {
  return params.normal() ? loglik_sln(params, data) : loglik_slt(params, data);
}

}  // namespace hsel
