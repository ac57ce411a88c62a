#include "hsel/em.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <string>

#include "hsel/inference.hpp"
#include "hsel/parallel.hpp"
#include "hsel/special.hpp"
#include "hsel/trunc_moments.hpp"
#include "hsel/two_step.hpp"

namespace hsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Rect2 censored_region() {
  Rect2 r;
  r.x1 = Interval::all();
  r.x2 = Interval::below(0);
  return r;
}

EStepRecord estep_sln_row(const SlParams& params, const Dataset& data, long i) {
  EStepRecord rec;
  rec.uhat = 1;
  if (data.selected(i)) {
    double v = data.outcome(i);
    CondNormal cn = conditional_normal(params, data.x().row(i), data.w().row(i), v);
    TruncMoments1 tm = tn1_moments(cn.mu_c, cn.sigma2_c, Interval::above(0));
    rec.y1hat << v, tm.m1;
    rec.y2hat << v * v, v * tm.m1, v * tm.m1, tm.m2;
  } else {
    Eigen::Vector2d mu(data.x().row(i).dot(params.beta), data.w().row(i).dot(params.gamma));
    TruncMoments2 tm = tn2_moments(mu, {params.sigma2, params.rho}, censored_region());
    rec.y1hat = tm.m1;
    rec.y2hat = tm.m2;
  }
  rec.uy = rec.y1hat;
  rec.uyy = rec.y2hat;
  return rec;
}

EStepRecord estep_slt_row(const SlParams& params, const Dataset& data, long i) {
  const double nu = params.nu;
  EStepRecord rec;
  if (data.selected(i)) {
    double v = data.outcome(i);
    CondT ct = conditional_t(params, data.x().row(i), data.w().row(i), v);
    double om_rho2 = 1 - params.rho * params.rho;
    double s_tilde2 = (nu + ct.delta) / (nu + 3) * om_rho2;
    double log_num = t_logcdf_std(ct.mu_t / std::sqrt(s_tilde2), nu + 3);
    double log_den = t_logcdf_std(ct.mu_t / std::sqrt(ct.sigma2_t), nu + 1);
    if (!std::isfinite(log_den))
      throw degenerate_truncation_error("selection probability vanished on a selected row");
    double uhat = (nu + 1) / (nu + ct.delta) * std::exp(log_num - log_den);
    TruncMoments1 w3 = tt1_moments({ct.mu_t, s_tilde2, nu + 3}, Interval::above(0));
    TruncMoments1 w1 = tt1_moments({ct.mu_t, ct.sigma2_t, nu + 1}, Interval::above(0));
    rec.uhat = uhat;
    rec.uy << v * uhat, uhat * w3.m1;
    rec.uyy << v * v * uhat, v * uhat * w3.m1, v * uhat * w3.m1, uhat * w3.m2;
    rec.y1hat << v, w1.m1;
    rec.y2hat << v * v, v * w1.m1, v * w1.m1, w1.m2;
  } else {
    Eigen::Vector2d mu(data.x().row(i).dot(params.beta), data.w().row(i).dot(params.gamma));
    Cov2 cov = Cov2::from({params.sigma2, params.rho});
    Cov2 cov_star = cov.scaled(nu / (nu + 2));
    // E[U | .] = T2(A; mu, Sigma*, nu+2) / T2(A; mu, Sigma, nu); both rectangles
    // are single-sided, so the ratio reduces to univariate t CDFs.
    double log_num = t_logcdf_std(-mu[1] / std::sqrt(cov_star.s22), nu + 2);
    double log_den = t_logcdf_std(-mu[1], nu);
    if (!std::isfinite(log_den))
      throw degenerate_truncation_error("selection probability vanished on a censored row");
    double uhat = std::exp(log_num - log_den);
    Rect2 region = censored_region();
    TruncMoments2 ws = tt2_moments_cov(mu, cov_star, nu + 2, region);
    TruncMoments2 yu = tt2_moments_cov(mu, cov, nu, region);
    rec.uhat = uhat;
    rec.uy = uhat * ws.m1;
    rec.uyy = uhat * ws.m2;
    rec.y1hat = yu.m1;
    rec.y2hat = yu.m2;
  }
  return rec;
}

template <typename RowFn>
std::vector<EStepRecord> run_estep(const Dataset& data, int threads, RowFn row) {
  std::vector<EStepRecord> records(data.n());
  parallel_for(data.n(), threads, [&](long i) {
    try {
      records[i] = row(i);
    } catch (const degenerate_truncation_error& e) {
      throw degenerate_truncation_error("E-step row " + std::to_string(i) + ": " + e.what());
    }
  });
  return records;
}

SlParams mstep_common(const std::vector<EStepRecord>& records, const Dataset& data,
                      const SlParams& current, bool printed_weighting) {
  const int p = data.p(), q = data.q();
  const long n = data.n();
  if (static_cast<long>(records.size()) != n)
    throw domain_error("mstep: record count does not match the dataset");

  // weight matrix: Sigma^{-1} (the Q maximizer); the literal printed Sigma is
  // available behind the debug flag for comparison runs
  double s = current.sigma();
  double s11, s12, s22;
  if (printed_weighting) {
    s11 = current.sigma2;
    s12 = current.rho * s;
    s22 = 1;
  } else {
    double det = current.sigma2 * (1 - current.rho * current.rho);
    s11 = 1 / det;
    s12 = -current.rho * s / det;
    s22 = current.sigma2 / det;
  }

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p + q, p + q);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p + q);
  for (long i = 0; i < n; ++i) {
    const auto& r = records[i];
    const auto xi = data.x().row(i);
    const auto wi = data.w().row(i);
    double u = r.uhat;
    a.topLeftCorner(p, p) += u * s11 * xi.transpose() * xi;
    a.topRightCorner(p, q) += u * s12 * xi.transpose() * wi;
    a.bottomRightCorner(q, q) += u * s22 * wi.transpose() * wi;
    b.head(p) += (s11 * r.uy[0] + s12 * r.uy[1]) * xi.transpose();
    b.tail(q) += (s12 * r.uy[0] + s22 * r.uy[1]) * wi.transpose();
  }
  a.bottomLeftCorner(q, p) = a.topRightCorner(p, q).transpose();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  Eigen::VectorXd beta_c;
  bool ok = ldlt.info() == Eigen::Success;
  if (ok) {
    beta_c = ldlt.solve(b);
    ok = ((a * beta_c - b).norm() <= 1e-6 * (1 + b.norm()));
  }
  if (!ok) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    std::string cols;
    for (int j = qr.rank(); j < p + q; ++j) {
      int c = qr.colsPermutation().indices()[j];
      cols += (cols.empty() ? "" : ", ");
      cols += c < p ? "beta[" + std::to_string(c) + "]" : "gamma[" + std::to_string(c - p) + "]";
    }
    throw singular_system_error("mstep: singular weighted normal equations; columns: " + cols);
  }

  SlParams next;
  next.beta = beta_c.head(p);
  next.gamma = beta_c.tail(q);
  next.nu = current.nu;

  // (psi, rho*) update at the fresh mean: rho* maximizes independently of psi,
  // then psi takes its conditional maximum.
  double g11 = 0, g12 = 0, g22 = 0;
  for (long i = 0; i < n; ++i) {
    const auto& r = records[i];
    double mu1 = data.x().row(i).dot(next.beta);
    double mu2 = data.w().row(i).dot(next.gamma);
    g11 += r.uyy(0, 0) - 2 * r.uy[0] * mu1 + r.uhat * mu1 * mu1;
    g22 += r.uyy(1, 1) - 2 * r.uy[1] * mu2 + r.uhat * mu2 * mu2;
    g12 += r.uyy(0, 1) - r.uy[0] * mu2 - r.uy[1] * mu1 + r.uhat * mu1 * mu2;
  }
  if (!(g22 > 0)) throw domain_error("mstep: nonpositive second-moment accumulation");
  double rho_star = g12 / g22;
  double psi = (g11 - 2 * rho_star * g12 + rho_star * rho_star * g22) / static_cast<double>(n);
  if (!(psi > 0)) throw domain_error("mstep: psi update is nonpositive");
  TransformedParams tp{psi, rho_star};
  tp.recover(&next.sigma2, &next.rho);
  // |rho| < 1 holds by construction; the clamp only absorbs rounding at the edge
  constexpr double kRhoEdge = 1 - 1e-8;
  next.rho = std::clamp(next.rho, -kRhoEdge, kRhoEdge);
  return next;
}

// Brent minimizer (golden section + parabolic interpolation) on [a, b].
double brent_min(const std::function<double(double)>& f, double a, double b, double xtol,
                 int max_eval, double* fmin_out) {
  const double gold = 0.3819660112501051;
  double x = a + gold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  int evals = 1;
  double d = 0, e = 0;
  while (evals < max_eval) {
    double m = 0.5 * (a + b);
    double tol1 = xtol * std::abs(x) + 1e-12, tol2 = 2 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    double p = 0, qq = 0, r = 0;
    if (std::abs(e) > tol1) {
      r = (x - w) * (fx - fv);
      qq = (x - v) * (fx - fw);
      p = (x - v) * qq - (x - w) * r;
      qq = 2 * (qq - r);
      if (qq > 0) p = -p;
      qq = std::abs(qq);
      double etmp = e;
      e = d;
      if (std::abs(p) >= std::abs(0.5 * qq * etmp) || p <= qq * (a - x) || p >= qq * (b - x)) {
        e = x >= m ? a - x : b - x;
        d = gold * e;
      } else {
        d = p / qq;
        double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = std::copysign(tol1, m - x);
      }
    } else {
      e = x >= m ? a - x : b - x;
      d = gold * e;
    }
    double u = std::abs(d) >= tol1 ? x + d : x + std::copysign(tol1, d);
    double fu = f(u);
    ++evals;
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; w = x; x = u;
      fv = fw; fw = fx; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; w = u; fv = fw; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  if (fmin_out) *fmin_out = fx;
  return x;
}

}  // namespace

std::vector<EStepRecord> estep_sln(const SlParams& params, const Dataset& data, int threads) {
  params.validate();
  if (!params.normal()) throw domain_error("estep_sln requires infinite nu");
  return run_estep(data, threads, [&](long i) { return estep_sln_row(params, data, i); });
}

std::vector<EStepRecord> estep_slt(const SlParams& params, const Dataset& data, int threads) {
  params.validate();
  if (params.normal()) throw domain_error("estep_slt requires finite nu");
  if (!(params.nu > 2))
    throw domain_error("estep_slt requires nu > 2 (conditional second moments)");
  return run_estep(data, threads, [&](long i) { return estep_slt_row(params, data, i); });
}

SlParams mstep_sln(const std::vector<EStepRecord>& records, const Dataset& data,
                   const SlParams& current, bool printed_weighting) {
  return mstep_common(records, data, current, printed_weighting);
}

SlParams mstep_slt(const std::vector<EStepRecord>& records, const Dataset& data,
                   const SlParams& current, bool printed_weighting) {
  return mstep_common(records, data, current, printed_weighting);
}

double cml_step_nu(const SlParams& params, const Dataset& data, double lo, double hi,
                   double warm_start, bool* at_bound) {
  if (!(lo > 0) || !(hi > lo)) throw domain_error("cml_step_nu: invalid bounds");
  SlParams work = params;
  auto neg_ll = [&](double log_nu) {
    work.nu = std::exp(log_nu);
    return -loglik_slt(work, data);
  };
  const double la = std::log(lo), lb = std::log(hi);
  double a = la, b = lb;
  if (warm_start > 0) {
    double lw = std::clamp(std::log(warm_start), la, lb);
    a = std::max(la, lw - 0.45);
    b = std::min(lb, lw + 0.45);
  }
  const double xtol = 2e-7;  // |d nu| <= nu * xtol <= 4e-5 over the default range
  double best_x = 0, best_f = 0;
  for (int expand = 0; expand < 12; ++expand) {
    best_x = brent_min(neg_ll, a, b, xtol, 60, &best_f);
    bool at_lo = best_x - a < 4 * xtol * std::abs(best_x) + 2e-9 && a > la;
    bool at_hi = b - best_x < 4 * xtol * std::abs(best_x) + 2e-9 && b < lb;
    if (at_lo) {
      a = std::max(la, a - 1.0);
    } else if (at_hi) {
      b = std::min(lb, b + 1.0);
    } else {
      break;
    }
  }
  double nu_hat = std::exp(best_x);
  // never step downhill: keep the incumbent when Brent's bracket missed it
  if (warm_start > 0 && warm_start >= lo && warm_start <= hi) {
    if (-neg_ll(std::log(warm_start)) > -best_f) nu_hat = warm_start;
  }
  if (at_bound) *at_bound = nu_hat >= hi * (1 - 1e-3);
  return nu_hat;
}

FitResult fit(const Dataset& data, const FitOptions& options) {
  options.validate();
  FitResult res;

  SlParams params;
  if (options.init.has_value()) {
    params = *options.init;
    params.validate();
    if (params.p() != data.p() || params.q() != data.q())
      throw domain_error("fit: init parameter dimensions do not match the data");
  } else {
    params = heckman_two_step(data);
  }
  bool estimate_nu = options.family == Family::t && options.nu_mode == NuMode::estimate;
  if (options.family == Family::t) {
    if (options.nu_mode == NuMode::fixed) {
      if (!(options.nu_value > 2)) throw domain_error("fit: fixed nu must exceed 2");
      params.nu = options.nu_value;
    } else if (params.normal() || !(params.nu > 2)) {
      params.nu = 10;  // mid-range default when the initializer has no nu
    }
    params.nu = estimate_nu ? std::clamp(params.nu, options.nu_lo, options.nu_hi) : params.nu;
  } else {
    params.nu = kInf;
  }

  const bool is_t = options.family == Family::t;
  double ll = loglik(params, data);
  res.loglik_trace.push_back(ll);

  bool converged = false;
  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    auto records = is_t ? estep_slt(params, data, options.threads)
                        : estep_sln(params, data, options.threads);
    params = mstep_common(records, data, params, options.printed_weighting);
    if (estimate_nu && (iter % options.cml_every == 0)) {
      bool at_bound = false;
      params.nu = cml_step_nu(params, data, options.nu_lo, options.nu_hi, params.nu, &at_bound);
      res.nu_at_bound = at_bound;
    }
    double ll_new = loglik(params, data);
    res.loglik_trace.push_back(ll_new);
    double rel = std::abs(ll_new / ll - 1.0);
    double abs_change = std::abs(ll_new - ll);
    ll = ll_new;
    if (rel < options.tol || (options.tol_abs > 0 && abs_change < options.tol_abs)) {
      converged = true;
      ++iter;
      break;
    }
  }
  res.iterations = iter;
  res.converged = converged;
  res.params = params;
  if (res.nu_at_bound)
    res.warnings.push_back("nu reached the upper search bound; the fit is effectively normal");
  if (!converged && options.max_iter > 0)
    res.warnings.push_back("EM did not meet the stopping rule within max_iter");

  int k = data.p() + data.q() + 2 + (estimate_nu ? 1 : 0);
  res.k_params = k;
  auto [aic, bic] = information_criteria(ll, k, data.n());
  res.aic = aic;
  res.bic = bic;

  if (options.compute_se) {
    auto records = is_t ? estep_slt(params, data, options.threads)
                        : estep_sln(params, data, options.threads);
    auto scores = is_t ? score_slt(params, data, records) : score_sln(params, data, records);
    InfoMatrix info = empirical_info(scores);
    res.se = standard_errors(info, &res.se_reliable, &res.se_condition);
    if (!res.se_reliable)
      res.warnings.push_back("information matrix is ill-conditioned; standard errors unreliable");
  } else {
    res.se = Eigen::VectorXd::Constant(data.p() + data.q() + 2,
                                       std::numeric_limits<double>::quiet_NaN());
  }
  return res;
}

}  // namespace hsel
