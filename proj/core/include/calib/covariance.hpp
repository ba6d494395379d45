#pragma once

#include "calib/types.hpp"

namespace calib {

// Estimated covariance of the latent log-abundances.
struct CovarianceEstimate {
  enum class Method { nodewise, shrinkage, oracle };

  MatrixXd matrix;
  Method method = Method::oracle;
  bool psd_repaired = false;
};

// Nuisance parameters of the log-ratio design: mean, covariance, noise
// variance, and the covariance of the additive log-ratio measurement errors.
struct LogContrastNuisance {
  VectorXd mu_ztilde;
  MatrixXd sigma_ztilde;
  double sigma_u_sq = 0.0;
  MatrixXd error_cov;
};

// Shared-reference convention: error_cov = s2u * (I + 11'), the exact
// covariance of log(u_j/u_ref) contrasts under elementwise multiplicative
// noise. This is the pipeline default.
LogContrastNuisance nuisance_shared_reference(VectorXd mu_ztilde, MatrixXd sigma_ztilde,
                                              double sigma_u_sq);

// Independent-error convention: error_cov = 2 * s2u * I, treating the
// log-ratio errors as uncorrelated. Kept for the classical calibration
// formulas and their closed-form covariance identity.
LogContrastNuisance nuisance_independent_errors(VectorXd mu_ztilde, MatrixXd sigma_ztilde,
                                                double sigma_u_sq);

// Base rate sqrt(2 log p / n) for the per-column node-wise penalty.
double default_nodewise_lambda(const MatrixXd& log_counts);

// Node-wise estimator: Lasso-regress each log-count column on the rest
// (penalty lambda_tilde * column sd), assemble C-hat and residual scales
// tau^2_j, return C^-1 T^2 - sigma_u_sq*I symmetrized. Columns are centered
// internally so the output estimates a covariance, not a second moment.
CovarianceEstimate nodewise_covariance(const MatrixXd& log_counts, double sigma_u_sq,
                                       double lambda_tilde);

// Shrinkage estimator: correlations shrunk toward the identity with
// analytic intensity, empirical variances kept, then sigma_u_sq*I removed.
CovarianceEstimate shrinkage_covariance(const MatrixXd& log_counts, double sigma_u_sq);

// Map latent-scale nuisances (mu_x, sigma_x) to log-ratio scale for the
// given 1-based reference component; error_cov uses the shared-reference
// convention.
LogContrastNuisance to_logcontrast_nuisance(const VectorXd& mu_x, const MatrixXd& sigma_x,
                                            double sigma_u_sq, int reference_index);

// Eigenvalue clip: symmetrize, floor eigenvalues, reassemble. With floor 0
// this is the Frobenius-nearest PSD matrix; idempotent.
MatrixXd psd_repair(const MatrixXd& m, double floor = 1e-8);

}  // namespace calib
