// Command-line front end. Flags mirror RunConfig field names; the same keys
// are accepted in a config file (--config) and written to manifest.ini.

#include <iostream>

#include <CLI11.hpp>

#include "xqr/pipeline.hpp"

int main(int argc, char** argv) {
  xqr::RunConfig c;
  CLI::App app{"Bayesian extreme quantile regions"};
  app.set_config("--config", "", "Read options from a key = value file (a previous manifest.ini works)");
  app.set_version_flag("--version", std::string(xqr::kVersion));

  app.add_option("mode,--mode", c.mode, "simulate | fit-uni | fit-biv | regions | diagnostics")
      ->required()
      ->check(CLI::IsMember({"simulate", "fit-uni", "fit-biv", "regions", "diagnostics"}));
  app.add_option("--data", c.data, "Input CSV (fit-uni, fit-biv, regions)");
  app.add_option("--draws", c.draws, "Posterior draws CSV (regions, diagnostics)");
  app.add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();

  app.add_option("--testbed", c.testbed, "frechet | half-t | inv-gamma | cauchy | trunc-t | asymmetric | clover")
      ->capture_default_str();
  app.add_option("--n", c.n, "Simulated sample size")->capture_default_str();
  app.add_option("--seed", c.seed)->capture_default_str();

  app.add_option("--level", c.level, "Censoring level (threshold quantile)")->capture_default_str();
  app.add_option("--prior", c.prior, "Marginal prior A | B | C")->capture_default_str();
  app.add_option("--nb-mean", c.nb_mean, "Negative-binomial mean of kappa - 3")->capture_default_str();
  app.add_option("--nb-variance", c.nb_variance)->capture_default_str();
  app.add_option("--p0-lo", c.p0_lo)->capture_default_str();
  app.add_option("--p0-hi", c.p0_hi)->capture_default_str();
  app.add_option("--p1-lo", c.p1_lo)->capture_default_str();
  app.add_option("--p1-hi", c.p1_hi)->capture_default_str();

  app.add_option("--iterations", c.iterations)->capture_default_str();
  app.add_option("--burn-in", c.burn_in)->capture_default_str();
  app.add_option("--pi-star", c.pi_star, "Target acceptance rate")->capture_default_str();
  app.add_option("--tau0", c.tau0)->capture_default_str();
  app.add_option("--gain", c.gain, "Scale adaptation gain: polynomial | harmonic | constant")->capture_default_str();
  app.add_option("--gain-exponent", c.gain_exponent)->capture_default_str();
  app.add_option("--paper-exact-c", c.paper_exact_c, "Use the one-sided Hastings factor for the degree move")
      ->capture_default_str();

  app.add_option("--probabilities", c.probabilities, "Exceedance probabilities")->capture_default_str();
  app.add_option("--credibility", c.credibility, "Pointwise band level for regions")->capture_default_str();
  app.add_option("--quantile-credibility", c.quantile_credibility)->capture_default_str();
  app.add_option("--grid-size", c.grid_size, "Number of angles w")->capture_default_str();
  app.add_option("--thin", c.thin)->capture_default_str();
  app.add_option("--nu-convention", c.nu_convention, "radius-weighted | exponent-measure")->capture_default_str();

  app.add_option("--y1", c.y1)->capture_default_str();
  app.add_option("--y2", c.y2)->capture_default_str();
  app.add_option("--covariate", c.covariate, "Covariate column");
  app.add_option("--regression", c.regression, "Quadratic location in the covariate")->capture_default_str();
  app.add_option("--covariate-value", c.covariate_value, "Covariate value for quantiles and regions");
  app.add_option("--check-invariants", c.check_invariants)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const auto result = xqr::run(c);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& f : result.files) std::cout << f << '\n';
    if (!result.failed_checks.empty()) {
      for (const auto& f : result.failed_checks) std::cerr << "check failed: " << f << '\n';
      return 3;
    }
  } catch (const xqr::StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
