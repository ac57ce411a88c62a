#include "hsel/two_step.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>

#include "hsel/special.hpp"

namespace hsel {

ProbitFit probit_fit(const Eigen::MatrixXd& w, const std::vector<uint8_t>& c) {
  const long n = w.rows();
  const int q = static_cast<int>(w.cols());
  if (static_cast<long>(c.size()) != n) throw domain_error("probit_fit: size mismatch");
  long ones = 0;
  for (auto v : c) ones += v;
  if (ones == 0 || ones == n) throw domain_error("probit_fit: both classes must be present");
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(w);
    qr.setThreshold(1e-10);
    if (qr.rank() < q) throw domain_error("probit_fit: rank-deficient design");
  }

  auto loglik = [&](const Eigen::VectorXd& g) {
    double s = 0;
    for (long i = 0; i < n; ++i) {
      double eta = w.row(i).dot(g);
      s += c[i] ? norm_logcdf(eta) : norm_logcdf(-eta);
    }
    return s;
  };

  auto check_separated = [&](const Eigen::VectorXd& g) {
    // every observation's index saturated on its own side => the likelihood
    // has no maximizer
    double min1 = std::numeric_limits<double>::infinity();
    double max0 = -std::numeric_limits<double>::infinity();
    for (long i = 0; i < n; ++i) {
      double eta = w.row(i).dot(g);
      if (c[i])
        min1 = std::min(min1, eta);
      else
        max0 = std::max(max0, eta);
    }
    return min1 > 4 && max0 < -4;
  };

  ProbitFit fit;
  fit.gamma = Eigen::VectorXd::Zero(q);
  double ll = loglik(fit.gamma);
  constexpr int kMaxIter = 100;
  for (int it = 1; it <= kMaxIter; ++it) {
    Eigen::VectorXd score = Eigen::VectorXd::Zero(q);
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(q, q);
    for (long i = 0; i < n; ++i) {
      double eta = w.row(i).dot(fit.gamma);
      double lp = mills_ratio(eta), lm = mills_ratio(-eta);
      double g = c[i] ? lp : -lm;
      score += g * w.row(i).transpose();
      info += lp * lm * w.row(i).transpose() * w.row(i);  // Fisher weight phi^2/(Phi(1-Phi))
    }
    fit.iterations = it;
    if (score.lpNorm<Eigen::Infinity>() < 1e-9) {
      fit.converged = true;
      break;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success)
      throw singular_system_error("probit_fit: singular information matrix");
    Eigen::VectorXd step = ldlt.solve(score);
    // acceptance slack rides on the loglik magnitude: 1e-12 absolute would sit
    // below rounding noise at |ll| ~ 1e4 and freeze the iteration
    const double slack = 4e-12 * (1 + std::abs(ll));
    double t = 1.0;
    Eigen::VectorXd cand;
    double ll_new = -std::numeric_limits<double>::infinity();
    for (int h = 0; h < 30; ++h, t *= 0.5) {
      cand = fit.gamma + t * step;
      ll_new = loglik(cand);
      if (ll_new >= ll - slack) break;
    }
    fit.gamma = cand;
    ll = ll_new;
    if (check_separated(fit.gamma) || fit.gamma.lpNorm<Eigen::Infinity>() > 1e5)
      throw separation_error("probit_fit: data are (quasi-)completely separated");
  }
  fit.loglik = ll;
  if (!fit.converged) {
    Eigen::VectorXd score = Eigen::VectorXd::Zero(q);
    for (long i = 0; i < n; ++i) {
      double eta = w.row(i).dot(fit.gamma);
      score += (c[i] ? mills_ratio(eta) : -mills_ratio(-eta)) * w.row(i).transpose();
    }
    fit.converged = score.lpNorm<Eigen::Infinity>() < 1e-8;
  }
  return fit;
}

SlParams heckman_two_step(const Dataset& data) {
  const int p = data.p();
  ProbitFit probit = probit_fit(data.w(), data.c());

  const long n1 = data.n_selected();
  if (n1 < p + 2) throw domain_error("two_step: needs at least p+2 selected rows");

  // least squares of v on [x, lambda_hat] over selected rows
  Eigen::MatrixXd z(n1, p + 1);
  Eigen::VectorXd y(n1);
  Eigen::VectorXd eta_sel(n1);
  long r = 0;
  for (long i = 0; i < data.n(); ++i) {
    if (!data.selected(i)) continue;
    double eta = data.w().row(i).dot(probit.gamma);
    z.row(r).head(p) = data.x().row(i);
    z(r, p) = mills_ratio(eta);
    eta_sel(r) = eta;
    y(r) = data.outcome(i);
    ++r;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  qr.setThreshold(1e-8);
  if (qr.rank() < p + 1)
    throw singular_system_error(
        "two_step: outcome design and the Mills-ratio column are (near-)collinear");
  Eigen::VectorXd coef = qr.solve(y);

  SlParams out;
  out.beta = coef.head(p);
  out.gamma = probit.gamma;
  double rho_star = coef(p);

  Eigen::VectorXd resid = y - z * coef;
  double mean_sq = resid.squaredNorm() / static_cast<double>(n1);
  double mean_delta = 0;
  for (long i = 0; i < n1; ++i) {
    double lam = z(i, p);
    mean_delta += lam * (lam + eta_sel(i));
  }
  mean_delta /= static_cast<double>(n1);
  out.sigma2 = mean_sq + rho_star * rho_star * mean_delta;
  if (!(out.sigma2 > 0)) out.sigma2 = mean_sq > 0 ? mean_sq : 1e-8;
  double rho = rho_star / std::sqrt(out.sigma2);
  out.rho = std::clamp(rho, -0.999, 0.999);
  return out;
}

}  // namespace hsel
