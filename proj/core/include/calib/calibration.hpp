#pragma once

#include "calib/covariance.hpp"
#include "calib/types.hpp"

namespace calib {

// Calibrated design: rows are conditional means of the true log-ratios given
// the observed ones, column-centered; sigma is their population covariance.
struct CalibratedDesign {
  MatrixXd m_matrix;
  MatrixXd sigma;
  LogContrastNuisance nuisance;
  bool centered = true;
};

// E(true log-ratios | observed v) = mu + S (S + E)^-1 (v - mu) with
// S = sigma_ztilde and E = the nuisance's error covariance. Solved by
// Cholesky with diagonal jitter escalation, never an explicit inverse.
VectorXd conditional_mean(const VectorXd& v_logcontrast, const LogContrastNuisance& nuisance);

// Covariance of the conditional means: S (S + E)^-1 S, symmetrized.
MatrixXd calibrated_covariance(const LogContrastNuisance& nuisance);

// Apply conditional_mean row-wise, then center columns; bundles sigma.
CalibratedDesign build_design(const MatrixXd& v_logcontrasts,
                              const LogContrastNuisance& nuisance);

}  // namespace calib
