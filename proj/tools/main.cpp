#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "subloo/commands.hpp"
#include "subloo/errors.hpp"

namespace {

// Exit codes: 0 success, 2 input/validation, 3 numerical degeneracy,
// 4 broken internal invariant (including a failing verify run).
int dispatch(const std::string& command, const subloo::cli::RunConfig& cfg) {
  try {
    return subloo::cli::run_command(command, cfg);
  } catch (const subloo::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const subloo::DegeneracyError& e) {
    std::cerr << "error (numerical degeneracy): " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "subloo: subsampled leave-one-out elpd estimation and Bayesian model "
      "comparison"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value file mirroring the flags; "
                                 "flags override the file");

  subloo::cli::RunConfig cfg;
  app.add_option("--seed", cfg.seed, "RNG seed (required wherever sampling "
                                     "happens; no wall-clock default)");
  app.add_option("--m", cfg.m, "subsample size");
  app.add_option("--surrogate", cfg.surrogate,
                 "plpd|waic_s|tis_s|psis|delta1_waic_m|delta1_waic|"
                 "delta2_waic|exact");
  app.add_option("--draws-used", cfg.draws_used,
                 "posterior draws the surrogate may touch (default: all)");
  app.add_option("--scheme", cfg.scheme, "srs_wor|srs_wr|pps_wr");
  app.add_option("--out", cfg.out,
                 "output path (report JSON; CSV for surrogate; directory "
                 "for simulate)");
  app.add_option("--threads", cfg.threads, "worker threads (default 1)");

  app.add_option("--loglik", cfg.loglik, "log-likelihood CSV, model A");
  app.add_option("--loglik-b", cfg.loglik_b, "log-likelihood CSV, model B");
  app.add_option("--exact", cfg.exact, "exact LOO values CSV, model A");
  app.add_option("--exact-b", cfg.exact_b, "exact LOO values CSV, model B");
  app.add_option("--dataset", cfg.dataset, "dataset CSV, model A");
  app.add_option("--dataset-b", cfg.dataset_b, "dataset CSV, model B");
  app.add_option("--draws", cfg.draws, "posterior draw CSV, model A");
  app.add_option("--draws-b", cfg.draws_b, "posterior draw CSV, model B");

  app.add_option("--n", cfg.sim_n, "simulate: observations");
  app.add_option("--p", cfg.sim_p, "simulate: covariates");
  app.add_option("--r2", cfg.sim_r2, "simulate: population R^2 in (0,1)");
  app.add_flag("--sparse", cfg.sim_sparse,
               "simulate: single nonzero coefficient");
  app.add_option("--num-draws", cfg.sim_draws,
                 "simulate: posterior draws to generate");
  app.add_flag("--nested-pair", cfg.sim_nested_pair,
               "simulate: also emit a model dropping the last covariate");

  app.add_option("--replicates", cfg.replicates,
                 "replicate: number of independent subsample plans");

  const char* const names[] = {"simulate", "surrogate", "estimate",
                               "compare",  "replicate", "verify"};
  const char* const descr[] = {
      "write a simulated regression fixture (dataset, draws, log-lik, exact "
      "LOO)",
      "compute an approximate LOO vector and write it as CSV",
      "estimate the total elpd of one model by subsampling",
      "estimate the elpd difference of two models on one shared subsample",
      "run repeated subsample plans and compare reported vs empirical SE",
      "run the exhaustive-enumeration unbiasedness checks"};
  for (int i = 0; i < 6; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], descr[i]);
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (cfg.threads < 1) {
    std::cerr << "error: --threads must be >= 1\n";
    return 2;
  }
  return dispatch(app.get_subcommands().front()->get_name(), cfg);
}
