#include "calib/covariance.hpp"

#include <cmath>

#include "calib/error_model.hpp"
#include "calib/lasso.hpp"

namespace calib {

LogContrastNuisance nuisance_shared_reference(VectorXd mu_ztilde, MatrixXd sigma_ztilde,
                                              double sigma_u_sq) {
  LogContrastNuisance nu;
  nu.error_cov = logratio_error_cov(sigma_u_sq, mu_ztilde.size());
  nu.mu_ztilde = std::move(mu_ztilde);
  nu.sigma_ztilde = std::move(sigma_ztilde);
  nu.sigma_u_sq = sigma_u_sq;
  return nu;
}

LogContrastNuisance nuisance_independent_errors(VectorXd mu_ztilde, MatrixXd sigma_ztilde,
                                                double sigma_u_sq) {
  LogContrastNuisance nu;
  nu.error_cov =
      2.0 * sigma_u_sq * MatrixXd::Identity(mu_ztilde.size(), mu_ztilde.size());
  nu.mu_ztilde = std::move(mu_ztilde);
  nu.sigma_ztilde = std::move(sigma_ztilde);
  nu.sigma_u_sq = sigma_u_sq;
  return nu;
}

double default_nodewise_lambda(const MatrixXd& log_counts) {
  const double n = static_cast<double>(log_counts.rows());
  const double p = static_cast<double>(log_counts.cols());
  return std::sqrt(2.0 * std::log(p) / n);
}

namespace {

VectorXd column_sd(const MatrixXd& centered) {
  const double n = static_cast<double>(centered.rows());
  return (centered.colwise().squaredNorm() / (n - 1.0)).cwiseSqrt().transpose();
}

}  // namespace

CovarianceEstimate nodewise_covariance(const MatrixXd& log_counts, double sigma_u_sq,
                                       double lambda_tilde) {
  if (!(lambda_tilde > 0.0)) throw InvalidInput("nodewise_covariance: lambda_tilde <= 0");
  const Eigen::Index n = log_counts.rows(), p = log_counts.cols();
  MatrixXd xc = log_counts.rowwise() - log_counts.colwise().mean();
  const VectorXd sd = column_sd(xc);

  MatrixXd c_hat = MatrixXd::Identity(p, p);
  VectorXd tau2(p);
  MatrixXd rest(n, p - 1);
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::Index c = 0;
    for (Eigen::Index k = 0; k < p; ++k)
      if (k != j) rest.col(c++) = xc.col(k);
    LassoSolution sol = lasso_fit(rest, xc.col(j), lambda_tilde * sd(j), 1e-6, 10000);
    const VectorXd resid = xc.col(j) - rest * sol.coefficients;
    tau2(j) = resid.dot(xc.col(j)) / static_cast<double>(n);
    if (tau2(j) <= 0.0)
      throw DegenerateResidual("nodewise_covariance: nonpositive residual scale at column " +
                               std::to_string(j + 1));
    c = 0;
    for (Eigen::Index k = 0; k < p; ++k)
      if (k != j) c_hat(j, k) = -sol.coefficients(c++);
  }

  Eigen::FullPivLU<MatrixXd> lu(c_hat);
  if (!lu.isInvertible()) throw SingularSystem("nodewise_covariance: singular C-hat");
  MatrixXd a = lu.solve(MatrixXd(tau2.asDiagonal()));
  CovarianceEstimate est;
  est.matrix = 0.5 * (a + a.transpose()) - sigma_u_sq * MatrixXd::Identity(p, p);
  est.method = CovarianceEstimate::Method::nodewise;
  return est;
}

CovarianceEstimate shrinkage_covariance(const MatrixXd& log_counts, double sigma_u_sq) {
  const Eigen::Index n = log_counts.rows(), p = log_counts.cols();
  if (n < 3) throw InvalidInput("shrinkage_covariance: need n >= 3");
  const double nd = static_cast<double>(n);
  MatrixXd xc = log_counts.rowwise() - log_counts.colwise().mean();
  const VectorXd sd = column_sd(xc);
  VectorXd sd_safe = sd;
  for (Eigen::Index j = 0; j < p; ++j)
    if (sd_safe(j) < 1e-12) sd_safe(j) = 1.0;
  MatrixXd xs = xc.array().rowwise() / sd_safe.transpose().array();

  // empirical correlations r_ij and their variances over samples
  MatrixXd wbar = xs.transpose() * xs / nd;
  MatrixXd xs2 = xs.cwiseProduct(xs);
  MatrixXd s2 = xs2.transpose() * xs2;  // sum_k xs_ki^2 xs_kj^2
  MatrixXd r = nd / (nd - 1.0) * wbar;
  MatrixXd var_r = nd / std::pow(nd - 1.0, 3) * (s2 - nd * wbar.cwiseProduct(wbar));

  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      if (i != j) {
        num += var_r(i, j);
        den += r(i, j) * r(i, j);
      }
  const double lam = den > 0.0 ? std::min(1.0, std::max(0.0, num / den)) : 1.0;

  MatrixXd corr = (1.0 - lam) * r;
  corr.diagonal().setOnes();
  CovarianceEstimate est;
  MatrixXd raw = corr.cwiseProduct(sd * sd.transpose());
  est.matrix = 0.5 * (raw + raw.transpose()) -
               sigma_u_sq * MatrixXd::Identity(p, p);
  est.method = CovarianceEstimate::Method::shrinkage;
  return est;
}

LogContrastNuisance to_logcontrast_nuisance(const VectorXd& mu_x, const MatrixXd& sigma_x,
                                            double sigma_u_sq, int reference_index) {
  const Eigen::Index p = mu_x.size();
  if (sigma_x.rows() != p || sigma_x.cols() != p)
    throw InvalidInput("to_logcontrast_nuisance: dimension mismatch");
  if (reference_index < 1 || reference_index > p)
    throw InvalidInput("to_logcontrast_nuisance: reference_index outside [1,p]");
  const Eigen::Index ref = reference_index - 1;

  VectorXd mu(p - 1);
  MatrixXd s(p - 1, p - 1);
  Eigen::Index a = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (j == ref) continue;
    mu(a) = mu_x(j) - mu_x(ref);
    Eigen::Index b = 0;
    for (Eigen::Index k = 0; k < p; ++k) {
      if (k == ref) continue;
      s(a, b) = sigma_x(j, k) - sigma_x(j, ref) - sigma_x(ref, k) + sigma_x(ref, ref);
      ++b;
    }
    ++a;
  }
  return nuisance_shared_reference(std::move(mu), std::move(s), sigma_u_sq);
}

MatrixXd psd_repair(const MatrixXd& m, double floor) {
  MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw SingularSystem("psd_repair: eigensolver failed");
  VectorXd w = eig.eigenvalues().cwiseMax(floor);
  MatrixXd out = eig.eigenvectors() * w.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace calib
