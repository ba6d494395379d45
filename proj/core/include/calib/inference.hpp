#pragma once

#include <vector>

#include "calib/calibration.hpp"
#include "calib/lasso.hpp"
#include "calib/types.hpp"

namespace calib {

// One-step bias-corrected estimate with per-coefficient standard errors.
struct DebiasedEstimate {
  enum class Method { proposed, debiased_lasso };

  VectorXd alpha_hat;
  VectorXd alpha_tilde;  // penalized first stage
  VectorXd se;
  double sigma_hat = 0.0;
  MatrixXd omega_hat;    // empirical Gram of the working design
  Method method = Method::proposed;
  double lambda = 0.0;   // penalty selected for the first stage
  MatrixXd sigma;        // covariance (or decorrelator inverse) used to debias
};

struct CoefficientInference {
  int index = 0;  // 1-based coefficient position
  double estimate = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  double level = 0.95;
};

// Standard normal CDF and quantile (rational approximation + refinement,
// absolute error well under 1e-10).
double normal_cdf(double x);
double normal_quantile(double p);

// One-step correction a_hat = a_tilde + (1/n) Sigma^{-1} M'(y - M a_tilde),
// solved against the PSD-repaired sigma by Cholesky.
VectorXd debias(const CalibratedDesign& design, const ResponseVector& response,
                const VectorXd& alpha_tilde);

// se_j = sigma_hat * sqrt([S^{-1/2} Omega S^{-1/2}]_jj) / sqrt(n) with the
// symmetric inverse square root taken by eigendecomposition (floor 1e-8).
VectorXd standard_errors(const CalibratedDesign& design, double sigma_hat);

// Two-sided intervals and p-values from the Gaussian limit.
std::vector<CoefficientInference> coefficient_inference(const DebiasedEstimate& est,
                                                        double level);

// Full pipeline on a noisy log-ratio design: calibrate, CV-select lambda,
// Lasso, noise scale by scaled Lasso at 10*sqrt(2 log q / n), debias, SEs.
DebiasedEstimate fit_proposed(const MatrixXd& v_logcontrasts, const VectorXd& response,
                              const LogContrastNuisance& nuisance, const CvConfig& cv);

// Comparator without measurement-error correction: Lasso on the centered
// noisy design, then a node-wise decorrelation step for the one-step
// correction and its standard errors.
DebiasedEstimate fit_debiased_lasso(const MatrixXd& v_logcontrasts, const VectorXd& response,
                                    const CvConfig& cv);

}  // namespace calib
