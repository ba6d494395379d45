// calib: debiased regression calibration for compositional covariates
// measured with multiplicative noise. Subcommands: simulate (Monte Carlo
// evaluation), analyze (real-data workflow), estimate-nuisance (reusable
// nuisance bundle), make-data (synthetic walkthrough dataset).
//
// Exit codes: 0 success, 2 invalid input or configuration, 3 numerical
// failure or unstable scenario.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "calib/types.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace calib;
  using namespace calib::cli;

  CLI::App app{"Debiased regression calibration for mismeasured compositional covariates"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads for Monte Carlo runs")
      ->check(CLI::PositiveNumber);

  SimulateOptions sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "Run a Monte Carlo scenario from a config file");
  c_sim->add_option("--config", sim.config_path, "Scenario config (TOML or JSON)")->required();
  c_sim->add_option("--n-mc", sim.n_mc_override, "Override the number of Monte Carlo replicates");
  c_sim->add_option("--seed", sim.seed_override, "Override the scenario seed");
  c_sim->add_option("--out", sim.out_dir, "Output directory")->required();

  AnalysisOptions ana;
  auto add_analysis_inputs = [&](CLI::App* c) {
    c->add_option("--counts", ana.counts_path, "Counts CSV (header row of component names)")
        ->required();
    c->add_option("--replicates", ana.replicate_paths,
                  "Comma-separated replicate CSV files (>= 2)")
        ->required()
        ->delimiter(',');
    c->add_option("--response", ana.response_path, "Response CSV (single column)")->required();
    c->add_option("--reference", ana.reference,
                  "Reference component (column name or 1-based index; default last)");
    c->add_option("--cov", ana.cov_estimator, "Covariance estimator: nodewise|shrinkage");
    c->add_option("--impute", ana.zero_impute, "Value substituted for zero counts");
    c->add_option("--sigma-u-columns", ana.sigma_u_columns,
                  "Restrict noise-variance estimation to these columns (names or indices)");
    c->add_option("--seed", ana.seed, "Seed for cross-validation folds");
  };

  CLI::App* c_ana = app.add_subcommand("analyze", "Estimate and test coefficients on real data");
  add_analysis_inputs(c_ana);
  c_ana->add_option("--level", ana.level, "Confidence level for intervals");
  c_ana->add_option("--folds", ana.cv_folds, "Cross-validation folds");
  c_ana->add_option("--nuisance-file", ana.nuisance_file,
                    "Pre-estimated nuisance bundle (skips inline estimation)");
  c_ana->add_option("--out", ana.out_path, "Output directory")->required();

  CLI::App* c_est = app.add_subcommand("estimate-nuisance",
                                       "Write the estimated nuisance bundle as JSON");
  add_analysis_inputs(c_est);
  std::string est_out;
  c_est->add_option("--out", est_out, "Output JSON file")->required();

  MakeDataOptions mk;
  CLI::App* c_mk = app.add_subcommand("make-data", "Generate a synthetic analysis dataset");
  c_mk->add_option("--n", mk.n, "Subjects");
  c_mk->add_option("--p", mk.p, "Components");
  c_mk->add_option("--replicates", mk.replicates, "Replicate measurements per subject");
  c_mk->add_option("--sigma-u-sq", mk.sigma_u_sq, "Multiplicative-noise log variance");
  c_mk->add_option("--rho", mk.rho, "Latent AR(1) dependence");
  c_mk->add_option("--sigma-eps", mk.sigma_eps, "Response noise SD");
  c_mk->add_option("--seed", mk.seed, "Generator seed");
  c_mk->add_option("--out", mk.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_sim->parsed()) {
      sim.threads = threads;
      return cmd_simulate(sim);
    }
    if (c_ana->parsed()) return cmd_analyze(ana);
    if (c_est->parsed()) {
      ana.out_path = est_out;
      return cmd_estimate_nuisance(ana);
    }
    if (c_mk->parsed()) return cmd_make_data(mk);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InsufficientReplicates& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
