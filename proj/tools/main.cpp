// hsel: maximum-likelihood fitting of sample-selection models with normal or
// Student-t errors, plus simulation and diagnostic tooling.

#include <CLI11.hpp>
#include <string>

#include "hsel/cli.hpp"
#include "hsel/parallel.hpp"

namespace {

void add_binding_flags(CLI::App* cmd, hsel::RunConfig& cfg) {
  cmd->add_option("--input,-i", cfg.input, "input CSV")->required();
  cmd->add_option("--outcome", cfg.bindings.outcome, "outcome column")->required();
  cmd->add_option("--select", cfg.bindings.select, "selection indicator column")->required();
  cmd->add_option("--x", cfg.bindings.x_cols, "outcome covariate columns (comma separated)")
      ->delimiter(',')
      ->required();
  cmd->add_option("--w", cfg.bindings.w_cols, "selection covariate columns (comma separated)")
      ->delimiter(',')
      ->required();
  cmd->add_flag("--no-intercept", [&cfg](int64_t) { cfg.bindings.intercept = false; },
                "do not prepend intercept columns");
}

void add_fit_flags(CLI::App* cmd, hsel::RunConfig& cfg, std::string& family, std::string& nu,
                   std::string& init) {
  cmd->add_option("--family", family, "error family: normal or t")->default_val("normal");
  cmd->add_option("--nu", nu, "degrees of freedom: a number or 'estimate'")
      ->default_val("estimate");
  cmd->add_option("--tol", cfg.fit_options.tol, "relative log-likelihood tolerance");
  cmd->add_option("--max-iter", cfg.fit_options.max_iter, "EM iteration cap");
  cmd->add_option("--nu-min", cfg.fit_options.nu_lo, "lower nu search bound");
  cmd->add_option("--nu-max", cfg.fit_options.nu_hi, "upper nu search bound");
  cmd->add_option("--init", init, "two-step (default) or a JSON parameter file");
  cmd->add_option("--threads", cfg.fit_options.threads, "worker threads (default HSEL_THREADS)");
  cmd->add_option("--cml-every", cfg.fit_options.cml_every, "profile nu every m iterations");
}

void finish_fit_flags(hsel::RunConfig& cfg, const std::string& family, const std::string& nu,
                      const std::string& init) {
  if (family == "normal") {
    cfg.fit_options.family = hsel::Family::normal;
  } else if (family == "t") {
    cfg.fit_options.family = hsel::Family::t;
    if (nu == "estimate") {
      cfg.fit_options.nu_mode = hsel::NuMode::estimate;
    } else {
      cfg.fit_options.nu_mode = hsel::NuMode::fixed;
      cfg.fit_options.nu_value = std::stod(nu);
    }
  } else {
    throw CLI::ValidationError("--family", "expected 'normal' or 't'");
  }
  if (!init.empty() && init != "two-step") cfg.init_file = init;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sample-selection model estimation (normal and Student-t errors)"};
  app.require_subcommand(1);

  hsel::RunConfig cfg;
  cfg.fit_options.threads = hsel::default_threads();
  std::string family = "normal", nu = "estimate", init = "two-step";
  std::string dgp_family = "normal";

  CLI::App* fit = app.add_subcommand("fit", "fit a selection model to CSV data");
  add_binding_flags(fit, cfg);
  add_fit_flags(fit, cfg, family, nu, init);
  fit->add_option("--method", cfg.method, "em (default) or two-step");
  fit->add_option("--out,-o", cfg.output, "output document path (.json)");

  CLI::App* sim = app.add_subcommand("simulate", "draw a synthetic selection dataset");
  sim->add_option("--family", dgp_family, "normal, t, or slash")->default_val("normal");
  sim->add_option("--nu", cfg.dgp.nu, "tail parameter for t/slash");
  sim->add_option("--n", cfg.dgp.n, "sample size")->required();
  sim->add_option("--rho", cfg.dgp.rho, "error correlation");
  sim->add_option("--sigma2", cfg.dgp.sigma2, "outcome error variance");
  sim->add_option("--missing", cfg.dgp.target_missing, "target missing rate (calibrates gamma0)");
  double g0 = std::numeric_limits<double>::quiet_NaN();
  sim->add_option("--gamma0", g0, "explicit selection intercept (overrides --missing)");
  sim->add_option("--seed", cfg.dgp.seed, "RNG seed");
  sim->add_option("--out,-o", cfg.output, "output CSV path")->required();

  CLI::App* mc = app.add_subcommand("mcstudy", "run a Monte Carlo study from a config file");
  mc->add_option("--config", cfg.study_file, "key = value study description")->required();
  mc->add_option("--out,-o", cfg.output, "output prefix");
  cfg.replicates = 0;
  cfg.study_threads = 0;
  mc->add_option("--replicates", cfg.replicates, "override replicate count");
  mc->add_option("--threads", cfg.study_threads, "override worker threads");

  CLI::App* res = app.add_subcommand("residuals", "martingale-type residuals and QQ envelope");
  add_binding_flags(res, cfg);
  add_fit_flags(res, cfg, family, nu, init);
  res->add_option("--out,-o", cfg.output, "output prefix");
  res->add_option("--replicates", cfg.envelope_nsim, "envelope replicates");
  res->add_option("--coverage", cfg.coverage, "envelope coverage");
  res->add_flag("--refit-envelope", cfg.refit_envelope, "refit each envelope replicate");
  res->add_option("--seed", cfg.seed, "envelope RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) {
      cfg.command = hsel::RunConfig::Command::fit;
      finish_fit_flags(cfg, family, nu, init);
    } else if (sim->parsed()) {
      cfg.command = hsel::RunConfig::Command::simulate;
      if (dgp_family == "normal") cfg.dgp.family = hsel::DgpFamily::normal;
      else if (dgp_family == "t") cfg.dgp.family = hsel::DgpFamily::t;
      else if (dgp_family == "slash") cfg.dgp.family = hsel::DgpFamily::slash;
      else throw CLI::ValidationError("--family", "expected normal, t, or slash");
      if (!std::isnan(g0)) cfg.dgp.gamma0 = g0;
    } else if (mc->parsed()) {
      cfg.command = hsel::RunConfig::Command::mcstudy;
    } else {
      cfg.command = hsel::RunConfig::Command::residuals;
      finish_fit_flags(cfg, family, nu, init);
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  }
  return hsel::run(cfg);
}
