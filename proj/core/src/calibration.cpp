#include "calib/calibration.hpp"

namespace calib {

namespace {

// Cholesky of S + E with jitter escalation 1e-10 -> 1e-6 before giving up.
Eigen::LLT<MatrixXd> factor_marginal(const LogContrastNuisance& nu) {
  const Eigen::Index q = nu.mu_ztilde.size();
  if (nu.sigma_ztilde.rows() != q || nu.sigma_ztilde.cols() != q ||
      nu.error_cov.rows() != q || nu.error_cov.cols() != q)
    throw InvalidInput("calibration: nuisance dimension mismatch");
  const MatrixXd k = 0.5 * (nu.sigma_ztilde + nu.sigma_ztilde.transpose()) + nu.error_cov;
  Eigen::LLT<MatrixXd> llt(k);
  if (llt.info() == Eigen::Success) return llt;
  for (double jitter = 1e-10; jitter <= 1e-6; jitter *= 100.0) {
    llt.compute(k + jitter * MatrixXd::Identity(q, q));
    if (llt.info() == Eigen::Success) return llt;
  }
  throw SingularSystem("calibration: marginal covariance not factorizable");
}

// Zero measurement error collapses the shrinkage map to the identity; take
// that limit exactly instead of solving S * S^-1.
bool noise_free(const LogContrastNuisance& nu) { return nu.error_cov.isZero(0.0); }

}  // namespace

VectorXd conditional_mean(const VectorXd& v_logcontrast, const LogContrastNuisance& nuisance) {
  if (v_logcontrast.size() != nuisance.mu_ztilde.size())
    throw InvalidInput("conditional_mean: dimension mismatch");
  if (noise_free(nuisance)) return v_logcontrast;
  const auto llt = factor_marginal(nuisance);
  return nuisance.mu_ztilde +
         nuisance.sigma_ztilde * llt.solve(v_logcontrast - nuisance.mu_ztilde);
}

MatrixXd calibrated_covariance(const LogContrastNuisance& nuisance) {
  if (noise_free(nuisance))
    return 0.5 * (nuisance.sigma_ztilde + nuisance.sigma_ztilde.transpose());
  const auto llt = factor_marginal(nuisance);
  const MatrixXd sig = nuisance.sigma_ztilde * llt.solve(nuisance.sigma_ztilde);
  return 0.5 * (sig + sig.transpose());
}

CalibratedDesign build_design(const MatrixXd& v_logcontrasts,
                              const LogContrastNuisance& nuisance) {
  if (v_logcontrasts.cols() != nuisance.mu_ztilde.size())
    throw InvalidInput("build_design: dimension mismatch");
  if (noise_free(nuisance)) {
    CalibratedDesign out;
    out.sigma = 0.5 * (nuisance.sigma_ztilde + nuisance.sigma_ztilde.transpose());
    out.m_matrix = v_logcontrasts.rowwise() - v_logcontrasts.colwise().mean();
    out.nuisance = nuisance;
    out.centered = true;
    return out;
  }
  const auto llt = factor_marginal(nuisance);
  // row i of M is mu + S K^-1 (v_i - mu); with symmetric S, K this is
  // (V - 1 mu') K^-1 S shifted back by mu
  const MatrixXd shrink = llt.solve(nuisance.sigma_ztilde);  // K^-1 S
  MatrixXd m = (v_logcontrasts.rowwise() - nuisance.mu_ztilde.transpose()) * shrink;
  m.rowwise() += nuisance.mu_ztilde.transpose();
  m.rowwise() -= m.colwise().mean();

  CalibratedDesign out;
  const MatrixXd sig = nuisance.sigma_ztilde * shrink;
  out.sigma = 0.5 * (sig + sig.transpose());
  out.m_matrix = std::move(m);
  out.nuisance = nuisance;
  out.centered = true;
  return out;
}

}  // namespace calib
