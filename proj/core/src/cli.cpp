#include "hsel/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "hsel/diagnostics.hpp"
#include "hsel/inference.hpp"
#include "hsel/result_json.hpp"
#include "hsel/two_step.hpp"
#include "hsel/svg.hpp"

namespace hsel {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void warn_exclusion_restriction(const CsvBindings& b) {
  std::set<std::string> xs(b.x_cols.begin(), b.x_cols.end());
  bool extra = false;
  for (const auto& wc : b.w_cols)
    if (!xs.count(wc)) extra = true;
  if (!extra)
    std::cerr << "warning: selection design adds no column beyond the outcome design; "
                 "identification rests on functional form alone\n";
}

void print_fit_table(const FitResult& res, const Dataset& data) {
  const SlParams& p = res.params;
  auto row = [](const std::string& name, double est, double se) {
    if (std::isnan(se))
      std::printf("  %-10s %10.4f          .\n", name.c_str(), est);
    else
      std::printf("  %-10s %10.4f %10.4f\n", name.c_str(), est, se);
  };
  std::printf("%-12s %10s %10s\n", "parameter", "estimate", "std.err");
  for (int j = 0; j < data.p(); ++j)
    row("beta[" + std::to_string(j) + "]", p.beta[j], res.se[j]);
  for (int j = 0; j < data.q(); ++j)
    row("gamma[" + std::to_string(j) + "]", p.gamma[j], res.se[data.p() + j]);
  row("sigma2", p.sigma2, res.se_sigma2());
  row("rho", p.rho, res.se[data.p() + data.q() + 1]);
  if (!p.normal()) row("nu", p.nu, std::numeric_limits<double>::quiet_NaN());
  std::printf("loglik %.4f  AIC %.3f  BIC %.3f  iterations %d  converged %s\n", res.loglik(),
              res.aic, res.bic, res.iterations, res.converged ? "yes" : "no");
  for (const auto& w : res.warnings) std::printf("warning: %s\n", w.c_str());
}

FitOptions parse_fit_family(const std::string& family, const std::string& nu_spec) {
  FitOptions fo;
  if (family == "normal") {
    fo.family = Family::normal;
  } else if (family == "t") {
    fo.family = Family::t;
    if (nu_spec.empty() || nu_spec == "estimate") {
      fo.nu_mode = NuMode::estimate;
    } else {
      fo.nu_mode = NuMode::fixed;
      fo.nu_value = std::stod(nu_spec);
    }
  } else {
    throw domain_error("unknown family '" + family + "' (expected normal or t)");
  }
  return fo;
}

int run_fit(const RunConfig& cfg) {
  Dataset data = load_csv(cfg.input, cfg.bindings);
  warn_exclusion_restriction(cfg.bindings);
  FitOptions fo = cfg.fit_options;
  if (!cfg.init_file.empty()) fo.init = params_from_json_file(cfg.init_file);
  FitResult res;
  if (cfg.method == "two-step") {
    if (fo.family != Family::normal)
      throw domain_error("--method two-step applies to the normal family only");
    res.params = heckman_two_step(data);
    res.converged = true;
    res.loglik_trace.push_back(loglik_sln(res.params, data));
    res.k_params = data.p() + data.q() + 2;
    auto [aic, bic] = information_criteria(res.loglik_trace.back(), res.k_params, data.n());
    res.aic = aic;
    res.bic = bic;
    res.se = Eigen::VectorXd::Constant(data.p() + data.q() + 2,
                                       std::numeric_limits<double>::quiet_NaN());
    res.warnings.push_back("two-step standard errors are not produced");
  } else if (cfg.method == "em") {
    res = fit(data, fo);
  } else {
    throw domain_error("unknown --method '" + cfg.method + "' (expected em or two-step)");
  }
  print_fit_table(res, data);
  if (!cfg.output.empty()) {
    std::string path = cfg.output;
    if (path.size() < 5 || path.substr(path.size() - 5) != ".json") path += ".json";
    write_fit_document(path, res, data, fo, cfg.method);
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int run_simulate(const RunConfig& cfg) {
  Dataset data = generate(cfg.dgp);
  if (cfg.output.empty()) throw domain_error("simulate needs --out");
  write_simulated_csv(cfg.output, data);
  long miss = data.n() - data.n_selected();
  std::printf("wrote %s (n=%ld, missing=%ld, gamma0=%.6f)\n", cfg.output.c_str(), data.n(), miss,
              cfg.dgp.resolved_gamma0());
  return 0;
}

void write_mc_summary_csv(const std::string& path, const std::vector<McSummary>& summaries) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw domain_error("cannot write '" + path + "'");
  std::fprintf(f, "param,true");
  for (const auto& s : summaries)
    std::fprintf(f, ",%s_em,%s_se,%s_mcse", s.fit_label.c_str(), s.fit_label.c_str(),
                 s.fit_label.c_str());
  std::fprintf(f, "\n");
  auto cell = [&](double v) {
    if (std::isnan(v))
      std::fprintf(f, ",");
    else
      std::fprintf(f, ",%.6f", v);
  };
  const auto& names = summaries.front().names;
  for (size_t j = 0; j < names.size(); ++j) {
    std::fprintf(f, "%s", names[j].c_str());
    double tr = summaries.front().truth[j];
    if (std::isinf(tr))
      std::fprintf(f, ",inf");
    else
      cell(tr);
    for (const auto& s : summaries) {
      cell(s.mean_est[j]);
      cell(s.mean_se[j]);
      cell(s.mc_sd[j]);
    }
    std::fprintf(f, "\n");
  }
  std::fprintf(f, "AIC,");
  for (const auto& s : summaries) std::fprintf(f, ",%.6f,,", s.mean_aic);
  std::fprintf(f, "\nBIC,");
  for (const auto& s : summaries) std::fprintf(f, ",%.6f,,", s.mean_bic);
  std::fprintf(f, "\nconverged,");
  for (const auto& s : summaries) std::fprintf(f, ",%d,,", s.converged);
  std::fprintf(f, "\nfailures,");
  for (const auto& s : summaries) std::fprintf(f, ",%d,,", s.failures);
  std::fprintf(f, "\n");
  std::fclose(f);
}

void write_mc_long_csv(const std::string& path, const std::vector<McRecord>& records) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw domain_error("cannot write '" + path + "'");
  std::fprintf(f, "replicate,fit,param,estimate,centered\n");
  for (const auto& r : records) {
    std::fprintf(f, "%d,%s,%s,%.17g,", r.replicate, r.fit_label.c_str(), r.param.c_str(),
                 r.estimate);
    if (std::isnan(r.centered))
      std::fprintf(f, "\n");
    else
      std::fprintf(f, "%.17g\n", r.centered);
  }
  std::fclose(f);
}

int run_mcstudy(const RunConfig& cfg) {
  StudyConfig sc = parse_study_config(cfg.study_file);
  if (cfg.replicates > 0) sc.replicates = cfg.replicates;
  if (cfg.study_threads > 0) sc.threads = cfg.study_threads;
  std::vector<McRecord> long_records;
  auto summaries = mc_study(sc.dgp, sc.fits, sc.replicates, sc.threads, &long_records);
  std::string prefix = cfg.output.empty() ? "mcstudy" : cfg.output;
  write_mc_summary_csv(prefix + "_summary.csv", summaries);
  write_mc_long_csv(prefix + "_long.csv", long_records);
  for (const auto& s : summaries)
    std::printf("%s: %d/%d converged, mean AIC %.3f, mean BIC %.3f\n", s.fit_label.c_str(),
                s.converged, s.requested, s.mean_aic, s.mean_bic);
  std::printf("wrote %s_summary.csv, %s_long.csv\n", prefix.c_str(), prefix.c_str());
  return 0;
}

int run_residuals(const RunConfig& cfg) {
  Dataset data = load_csv(cfg.input, cfg.bindings);
  warn_exclusion_restriction(cfg.bindings);
  FitOptions fo = cfg.fit_options;
  if (!cfg.init_file.empty()) fo.init = params_from_json_file(cfg.init_file);
  FitResult res = fit(data, fo);
  if (!res.converged) std::printf("warning: fit did not converge; residuals use the last iterate\n");

  ResidualSet rs = martingale_residuals(res.params, data);
  EnvelopeOptions eo;
  eo.n_sim = cfg.envelope_nsim;
  eo.coverage = cfg.coverage;
  eo.seed = cfg.seed;
  eo.refit = cfg.refit_envelope;
  eo.threads = fo.threads;
  eo.fit_options = fo;
  Envelope env = simulated_envelope(res.params, data, eo);

  std::string prefix = cfg.output.empty() ? "residuals" : cfg.output;
  {
    std::FILE* f = std::fopen((prefix + "_residuals.csv").c_str(), "w");
    if (!f) throw domain_error("cannot write residual CSV");
    std::fprintf(f, "row,c,r_m,r_mt\n");
    for (long i = 0; i < data.n(); ++i)
      std::fprintf(f, "%ld,%d,%.17g,%.17g\n", i + 1, static_cast<int>(rs.c[i]), rs.r_m[i],
                   rs.r_mt[i]);
    std::fclose(f);
  }
  {
    std::FILE* f = std::fopen((prefix + "_envelope.csv").c_str(), "w");
    if (!f) throw domain_error("cannot write envelope CSV");
    std::fprintf(f, "rank,theoretical,low,median,high,observed\n");
    for (long i = 0; i < data.n(); ++i)
      std::fprintf(f, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g\n", i + 1, env.theoretical[i], env.low[i],
                   env.median[i], env.high[i], env.observed_sorted[i]);
    std::fclose(f);
  }
  write_qq_envelope_svg(prefix + "_qq.svg", env);
  long outside = 0;
  for (long i = 0; i < data.n(); ++i)
    if (env.observed_sorted[i] < env.low[i] || env.observed_sorted[i] > env.high[i]) ++outside;
  std::printf("%ld of %ld residuals outside the %.0f%% envelope\n", outside, data.n(),
              100 * cfg.coverage);
  std::printf("wrote %s_residuals.csv, %s_envelope.csv, %s_qq.svg\n", prefix.c_str(),
              prefix.c_str(), prefix.c_str());
  return 0;
}

}  // namespace

StudyConfig parse_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw domain_error("cannot open study config '" + path + "'");
  StudyConfig sc;
  std::string fit_list = "normal,t";
  std::string fit_nu = "estimate";
  double fit_tol = 0;
  int fit_max_iter = 0;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw domain_error("study config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key == "family") {
      if (val == "normal") sc.dgp.family = DgpFamily::normal;
      else if (val == "t") sc.dgp.family = DgpFamily::t;
      else if (val == "slash") sc.dgp.family = DgpFamily::slash;
      else throw domain_error("study config: unknown family '" + val + "'");
    } else if (key == "nu") {
      sc.dgp.nu = std::stod(val);
    } else if (key == "n") {
      sc.dgp.n = std::stol(val);
    } else if (key == "beta") {
      auto parts = split_list(val);
      if (parts.size() != 2) throw domain_error("study config: beta needs 2 values");
      sc.dgp.beta << std::stod(parts[0]), std::stod(parts[1]);
    } else if (key == "gamma_slopes") {
      auto parts = split_list(val);
      if (parts.size() != 2) throw domain_error("study config: gamma_slopes needs 2 values");
      sc.dgp.gamma1 = std::stod(parts[0]);
      sc.dgp.gamma2 = std::stod(parts[1]);
    } else if (key == "gamma0") {
      sc.dgp.gamma0 = std::stod(val);
    } else if (key == "missing") {
      sc.dgp.target_missing = std::stod(val);
    } else if (key == "sigma2") {
      sc.dgp.sigma2 = std::stod(val);
    } else if (key == "rho") {
      sc.dgp.rho = std::stod(val);
    } else if (key == "seed") {
      sc.dgp.seed = std::stoull(val);
    } else if (key == "replicates") {
      sc.replicates = std::stoi(val);
    } else if (key == "threads") {
      sc.threads = std::stoi(val);
    } else if (key == "fit") {
      fit_list = val;
    } else if (key == "fit_nu") {
      fit_nu = val;
    } else if (key == "fit_tol") {
      fit_tol = std::stod(val);
    } else if (key == "fit_max_iter") {
      fit_max_iter = std::stoi(val);
    } else {
      throw domain_error("study config line " + std::to_string(lineno) + ": unknown key '" + key +
                         "'");
    }
  }
  for (const auto& fam : split_list(fit_list)) {
    FitOptions fo = parse_fit_family(fam, fit_nu);
    if (fit_tol > 0) fo.tol = fit_tol;
    if (fit_max_iter > 0) fo.max_iter = fit_max_iter;
    sc.fits.push_back(fo);
  }
  if (sc.fits.empty()) throw domain_error("study config: no fit families");
  return sc;
}

int run(const RunConfig& config) {
  try {
    switch (config.command) {
      case RunConfig::Command::fit:
        return run_fit(config);
      case RunConfig::Command::simulate:
        return run_simulate(config);
      case RunConfig::Command::mcstudy:
        return run_mcstudy(config);
      case RunConfig::Command::residuals:
        return run_residuals(config);
    }
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace hsel
