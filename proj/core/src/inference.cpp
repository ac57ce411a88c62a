#include "hsel/inference.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "hsel/em.hpp"

namespace hsel {

namespace {

std::vector<ScoreVector> score_common(const SlParams& params, const Dataset& data,
                                      const std::vector<EStepRecord>& records) {
  params.validate();
  if (static_cast<long>(records.size()) != data.n())
    throw domain_error("score: record count does not match the dataset");
  const int p = data.p(), q = data.q();
  const double s = params.sigma(), rho = params.rho;

  Eigen::Matrix2d sigma, sigma_inv, B, D;
  sigma << params.sigma2, rho * s, rho * s, 1;
  double det = params.sigma2 * (1 - rho * rho);
  sigma_inv << 1 / det, -rho * s / det, -rho * s / det, params.sigma2 / det;
  B << 2 * s, rho, rho, 0;  // dSigma/dsigma
  D << 0, s, s, 0;          // dSigma/drho
  Eigen::Matrix2d mb = sigma_inv * B * sigma_inv;
  Eigen::Matrix2d md = sigma_inv * D * sigma_inv;
  double tr_sb = (sigma_inv * B).trace();
  double tr_sd = (sigma_inv * D).trace();

  std::vector<ScoreVector> out(records.size());
  for (long i = 0; i < data.n(); ++i) {
    const auto& r = records[i];
    const auto xi = data.x().row(i);
    const auto wi = data.w().row(i);
    double mu1 = xi.dot(params.beta), mu2 = wi.dot(params.gamma);
    // X_ic' Sigma^{-1} (uy - uhat*mu)
    double d1 = r.uy[0] - r.uhat * mu1, d2 = r.uy[1] - r.uhat * mu2;
    ScoreVector sv;
    sv.s_beta_c.resize(p + q);
    sv.s_beta_c.head(p) = (sigma_inv(0, 0) * d1 + sigma_inv(0, 1) * d2) * xi.transpose();
    sv.s_beta_c.tail(q) = (sigma_inv(1, 0) * d1 + sigma_inv(1, 1) * d2) * wi.transpose();
    Eigen::Vector2d mu(mu1, mu2);
    Eigen::Matrix2d gamma_i = r.uyy - r.uy * mu.transpose() - mu * r.uy.transpose() +
                              r.uhat * mu * mu.transpose();
    sv.s_sigma = -0.5 * tr_sb + 0.5 * (gamma_i * mb).trace();
    sv.s_rho = -0.5 * tr_sd + 0.5 * (gamma_i * md).trace();
    out[i] = std::move(sv);
  }
  return out;
}

}  // namespace

std::vector<ScoreVector> score_sln(const SlParams& params, const Dataset& data,
                                   const std::vector<EStepRecord>& records) {
  if (!params.normal()) throw domain_error("score_sln requires infinite nu");
  return score_common(params, data, records);
}

std::vector<ScoreVector> score_slt(const SlParams& params, const Dataset& data,
                                   const std::vector<EStepRecord>& records) {
  if (params.normal()) throw domain_error("score_slt requires finite nu");
  return score_common(params, data, records);
}

InfoMatrix empirical_info(const std::vector<ScoreVector>& scores) {
  if (scores.empty()) throw domain_error("empirical_info: no scores");
  const int d = static_cast<int>(scores.front().s_beta_c.size()) + 2;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (const auto& s : scores) {
    Eigen::VectorXd v = s.flat();
    m.selfadjointView<Eigen::Lower>().rankUpdate(v);
  }
  Eigen::MatrixXd full = m.selfadjointView<Eigen::Lower>();
  return {full};
}

Eigen::VectorXd standard_errors(const InfoMatrix& info, bool* reliable, double* condition) {
  const int d = static_cast<int>(info.m.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info.m);
  const auto& lam = es.eigenvalues();
  const auto& vec = es.eigenvectors();
  double lmax = lam.maxCoeff();
  double lmin = lam.minCoeff();
  double cond = (lmin > 0) ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (condition) *condition = cond;
  bool ok = lmin > 0 && cond <= 1e12;
  if (reliable) *reliable = ok;

  Eigen::VectorXd se(d);
  const double null_tol = lmax * 1e-12;
  for (int j = 0; j < d; ++j) {
    double var = 0;
    bool affected = false;
    for (int k = 0; k < d; ++k) {
      if (lam[k] <= null_tol) {
        // coordinate loads on a numerically null direction -> unavailable
        if (std::abs(vec(j, k)) > 1e-6) affected = true;
        continue;
      }
      var += vec(j, k) * vec(j, k) / lam[k];
    }
    se[j] = affected ? std::numeric_limits<double>::quiet_NaN() : std::sqrt(var);
  }
  return se;
}

std::pair<double, double> information_criteria(double loglik, int k, long n) {
  if (n < 1) throw domain_error("information_criteria: n must be >= 1");
  if (k < 0) throw domain_error("information_criteria: k must be >= 0");
  return {-2 * loglik + 2 * k, -2 * loglik + k * std::log(static_cast<double>(n))};
}

}  // namespace hsel
