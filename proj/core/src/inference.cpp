#include "calib/inference.hpp"

#include <cmath>

namespace calib {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

namespace {

// rational approximation for the probit (Acklam), then one Halley step
double probit_seed(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("normal_quantile: p outside (0,1)");
  double x = probit_seed(p);
  // Halley refinement against the high-precision CDF
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

VectorXd debias(const CalibratedDesign& design, const ResponseVector& response,
                const VectorXd& alpha_tilde) {
  const Eigen::Index n = design.m_matrix.rows(), q = design.m_matrix.cols();
  if (response.size() != n || alpha_tilde.size() != q)
    throw InvalidInput("debias: dimension mismatch");
  const MatrixXd repaired = psd_repair(design.sigma, 1e-8);
  Eigen::LLT<MatrixXd> llt(repaired);
  if (llt.info() != Eigen::Success) throw SingularSystem("debias: sigma not factorizable");
  const VectorXd resid = response.values - design.m_matrix * alpha_tilde;
  return alpha_tilde +
         llt.solve(design.m_matrix.transpose() * resid) / static_cast<double>(n);
}

VectorXd standard_errors(const CalibratedDesign& design, double sigma_hat) {
  if (sigma_hat < 0.0) throw InvalidInput("standard_errors: sigma_hat < 0");
  const Eigen::Index n = design.m_matrix.rows();
  const MatrixXd omega =
      design.m_matrix.transpose() * design.m_matrix / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (design.sigma + design.sigma.transpose()));
  if (eig.info() != Eigen::Success) throw SingularSystem("standard_errors: eigensolver failed");
  const VectorXd w = eig.eigenvalues().cwiseMax(1e-8);
  const MatrixXd isqrt = eig.eigenvectors() * w.cwiseSqrt().cwiseInverse().asDiagonal() *
                         eig.eigenvectors().transpose();
  const MatrixXd sandwich = isqrt * omega * isqrt;
  return sigma_hat * sandwich.diagonal().cwiseMax(0.0).cwiseSqrt() /
         std::sqrt(static_cast<double>(n));
}

std::vector<CoefficientInference> coefficient_inference(const DebiasedEstimate& est,
                                                        double level) {
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("coefficient_inference: bad level");
  const double z = normal_quantile(1.0 - 0.5 * (1.0 - level));
  std::vector<CoefficientInference> out;
  out.reserve(static_cast<std::size_t>(est.alpha_hat.size()));
  for (Eigen::Index j = 0; j < est.alpha_hat.size(); ++j) {
    CoefficientInference ci;
    ci.index = static_cast<int>(j) + 1;
    ci.estimate = est.alpha_hat(j);
    ci.se = est.se(j);
    ci.level = level;
    if (ci.se > 0.0) {
      ci.ci_low = ci.estimate - z * ci.se;
      ci.ci_high = ci.estimate + z * ci.se;
      ci.p_value = 2.0 - 2.0 * normal_cdf(std::abs(ci.estimate) / ci.se);
    } else {
      // degenerate scale (e.g. zero response): point interval
      ci.ci_low = ci.ci_high = ci.estimate;
      ci.p_value = ci.estimate == 0.0 ? 1.0 : 0.0;
    }
    out.push_back(ci);
  }
  return out;
}

namespace {

double scaled_lasso_rate(Eigen::Index n, Eigen::Index q) {
  return 10.0 * std::sqrt(2.0 * std::log(static_cast<double>(q)) /
                          static_cast<double>(n));
}

// node-wise decorrelator: row j is (e_j - gamma_j embedded) / tau^2_j from
// a Lasso of column j on the others at penalty sqrt(2 log q / n) * sd_j
MatrixXd nodewise_decorrelator(const MatrixXd& xc) {
  const Eigen::Index n = xc.rows(), q = xc.cols();
  const double nd = static_cast<double>(n);
  const double rate = std::sqrt(2.0 * std::log(static_cast<double>(q)) / nd);
  MatrixXd m = MatrixXd::Zero(q, q);
  MatrixXd rest(n, q - 1);
  for (Eigen::Index j = 0; j < q; ++j) {
    Eigen::Index c = 0;
    for (Eigen::Index k = 0; k < q; ++k)
      if (k != j) rest.col(c++) = xc.col(k);
    const double sd = std::sqrt(xc.col(j).squaredNorm() / (nd - 1.0));
    const double lam = rate * (sd > 0.0 ? sd : 1.0);
    LassoSolution sol = lasso_fit(rest, xc.col(j), lam, 1e-6, 10000);
    const VectorXd resid = xc.col(j) - rest * sol.coefficients;
    const double tau2 = resid.dot(xc.col(j)) / nd;
    if (tau2 <= 0.0)
      throw DegenerateResidual("fit_debiased_lasso: nonpositive residual scale at column " +
                               std::to_string(j + 1));
    m(j, j) = 1.0 / tau2;
    c = 0;
    for (Eigen::Index k = 0; k < q; ++k)
      if (k != j) m(j, k) = -sol.coefficients(c++) / tau2;
  }
  return m;
}

}  // namespace

DebiasedEstimate fit_proposed(const MatrixXd& v_logcontrasts, const VectorXd& response,
                              const LogContrastNuisance& nuisance, const CvConfig& cv) {
  const Eigen::Index n = v_logcontrasts.rows(), q = v_logcontrasts.cols();
  CalibratedDesign design = build_design(v_logcontrasts, nuisance);
  ResponseVector yc;
  yc.values = response.array() - response.mean();
  yc.centered = true;

  const CvResult cvres = cross_validate_lambda(design.m_matrix, yc.values, cv);
  const LassoSolution first = lasso_fit(design.m_matrix, yc.values, cvres.lambda_star);
  const ScaledLassoSolution scale =
      scaled_lasso(design.m_matrix, yc.values, scaled_lasso_rate(n, q));

  DebiasedEstimate est;
  est.method = DebiasedEstimate::Method::proposed;
  est.alpha_tilde = first.coefficients;
  est.alpha_hat = debias(design, yc, first.coefficients);
  est.sigma_hat = scale.sigma_hat;
  est.se = standard_errors(design, scale.sigma_hat);
  est.omega_hat =
      design.m_matrix.transpose() * design.m_matrix / static_cast<double>(n);
  est.lambda = cvres.lambda_star;
  est.sigma = design.sigma;
  return est;
}

DebiasedEstimate fit_debiased_lasso(const MatrixXd& v_logcontrasts, const VectorXd& response,
                                    const CvConfig& cv) {
  const Eigen::Index n = v_logcontrasts.rows(), q = v_logcontrasts.cols();
  const double nd = static_cast<double>(n);
  const MatrixXd vc = v_logcontrasts.rowwise() - v_logcontrasts.colwise().mean();
  const VectorXd yc = response.array() - response.mean();

  const CvResult cvres = cross_validate_lambda(vc, yc, cv);
  const LassoSolution first = lasso_fit(vc, yc, cvres.lambda_star);
  const ScaledLassoSolution scale = scaled_lasso(vc, yc, scaled_lasso_rate(n, q));

  const MatrixXd decor = nodewise_decorrelator(vc);
  const VectorXd resid = yc - vc * first.coefficients;
  const MatrixXd omega = vc.transpose() * vc / nd;

  DebiasedEstimate est;
  est.method = DebiasedEstimate::Method::debiased_lasso;
  est.alpha_tilde = first.coefficients;
  est.alpha_hat = first.coefficients + decor * (vc.transpose() * resid) / nd;
  est.sigma_hat = scale.sigma_hat;
  est.se = scale.sigma_hat *
           (decor * omega * decor.transpose()).diagonal().cwiseMax(0.0).cwiseSqrt() /
           std::sqrt(nd);
  est.omega_hat = omega;
  est.lambda = cvres.lambda_star;
  est.sigma = decor;  // decorrelator in place of a covariance
  return est;
}

}  // namespace calib
