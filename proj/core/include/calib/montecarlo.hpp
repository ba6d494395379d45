#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "calib/covariance.hpp"
#include "calib/error_model.hpp"
#include "calib/types.hpp"

namespace calib {

// One simulated evaluation setting: data dimensions, dependence, noise
// levels, true coefficients, and how nuisances are obtained.
struct SimulationScenario {
  enum class NuisanceMode { oracle, estimated };

  int n = 100;
  int p = 100;
  double rho = 0.2;              // AR(1) dependence of latent log-abundances
  double sigma_u_sq = 1.0;       // multiplicative-noise log variance
  double sigma_eps = 0.5;        // response noise SD
  VectorXd alpha_true;           // length p-1; empty = default sparse vector
  int n_replicate_obs = 3;       // contaminated copies beyond the working one
  NuisanceMode nuisance_mode = NuisanceMode::oracle;
  CovarianceEstimate::Method cov_estimator = CovarianceEstimate::Method::shrinkage;
  int n_mc = 200;
  std::uint64_t seed = 0;

  // First five latent log-means are log(p/2), the rest 0, so component
  // proportions differ; reference is always the last component.
  VectorXd mu_x() const;
  MatrixXd sigma_x() const;             // AR(1) correlation rho^|i-j|
  VectorXd effective_alpha() const;     // alpha_true or the default vector
};

// Default sparse coefficient vector (1, -0.8, 1.5, 0.6, -0.9, 1.2, 0.4, 0...).
VectorXd default_alpha(int p);

// One simulated dataset: response, working contaminated counts, extra
// replicates, and the latent truth for scoring.
struct SimulatedDataset {
  ResponseVector y;
  CountMatrix w;                          // first contaminated replicate
  std::vector<CountMatrix> replicates;    // all R copies, w first
  MatrixXd ztilde_truth;                  // true log-ratio design
  MatrixXd logx_truth;
};

// Deterministic in (scenario.seed, replicate_index).
SimulatedDataset generate_dataset(const SimulationScenario& sc, int replicate_index);

// Per-coefficient Monte Carlo summaries for one method.
struct MethodSummary {
  VectorXd bias;
  VectorXd rmse;
  VectorXd mean_model_se;   // NaN when the method carries no inference theory
  VectorXd empirical_sd;
  VectorXd coverage_rate;   // NaN likewise
  bool has_inference = false;
};

struct SummaryTable {
  std::map<std::string, MethodSummary> methods;  // lasso, cocolasso, debiased_lasso, proposed
  VectorXd alpha_true;
  int n_mc_completed = 0;
  int n_failed = 0;
};

// Run all four methods over n_mc replicates and summarize bias, RMSE, mean
// model SE, empirical SD, and CI coverage at the 95% level. Replicates that
// fail numerically are excluded and counted; more than 5% failures raises
// ScenarioUnstable. Results do not depend on the thread count.
SummaryTable run_scenario(const SimulationScenario& sc, int threads = 1);

}  // namespace calib
