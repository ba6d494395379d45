#pragma once

#include <cstdint>
#include <vector>

#include "calib/types.hpp"

namespace calib {

// min (1/2n)||y - X a||^2 + lambda ||a||_1
struct LassoProblem {
  MatrixXd design;
  VectorXd response;
  double lambda = 0.0;
};

struct LassoSolution {
  VectorXd coefficients;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double kkt_violation = 0.0;  // max stationarity violation, see kkt_violation()
};

struct ScaledLassoSolution {
  VectorXd coefficients;
  double sigma_hat = 0.0;
  double lambda_tilde = 0.0;
};

struct CvConfig {
  int folds = 5;
  std::vector<double> lambda_grid;  // descending; empty = default 50-point grid
  std::uint64_t seed = 0;
};

struct CvResult {
  double lambda_star = 0.0;
  std::vector<double> cv_curve;  // pooled held-out MSE per grid point
};

// Cyclic coordinate descent with residual caching and soft-threshold updates.
// Convergence: max coefficient change < tol and KKT violation <= 10*tol.
// Exceeding max_iter returns converged=false (callers decide what to do).
LassoSolution lasso_fit(const MatrixXd& design, const VectorXd& response, double lambda,
                        double tol = 1e-7, int max_iter = 100000,
                        const VectorXd* warm_start = nullptr);
LassoSolution lasso_fit(const LassoProblem& problem, double tol = 1e-7,
                        int max_iter = 100000);

// Solutions along a descending lambda path, warm-started left to right.
// Returns q x grid.size() coefficient matrix.
MatrixXd lasso_path(const MatrixXd& design, const VectorXd& response,
                    const std::vector<double>& grid, double tol = 1e-7,
                    int max_iter = 100000);

// Stationarity certificate: max over j of |g_j| - lambda (inactive) and
// |g_j + lambda*sign(a_j)| (active), where g = -X'(y - Xa)/n.
double kkt_violation(const MatrixXd& design, const VectorXd& response,
                     const VectorXd& coef, double lambda);

// 50 log-spaced points from lambda_max = max_j |x_j'y|/n down to 1e-3 of it.
std::vector<double> default_lambda_grid(const MatrixXd& design, const VectorXd& response);

// Deterministic k-fold CV; pooled held-out MSE; ties resolved to the larger
// lambda (first on the descending grid).
CvResult cross_validate_lambda(const MatrixXd& design, const VectorXd& response,
                               const CvConfig& cfg);

// Joint coefficient/noise-scale estimation: alternate a Lasso step at penalty
// sigma*lambda_tilde with sigma^2 <- ||y - X a||^2 / n until sigma moves
// less than 1e-8. Throws NotConverged after 500 outer rounds.
ScaledLassoSolution scaled_lasso(const MatrixXd& design, const VectorXd& response,
                                 double lambda_tilde);

// Error-corrected Lasso comparator: replaces the Gram matrix of the noisy
// log-ratio design with its corrected, nearest-PSD surrogate
// S = cov(V) - error_cov and minimizes (1/2) a'Sa - (V'y/n)'a + lambda||a||_1
// by coordinate descent. Inputs are centered internally.
LassoSolution cocolasso_fit(const MatrixXd& v_logcontrasts, const VectorXd& response,
                            double sigma_u_sq, double lambda_star);

// CV for the corrected comparator: held-out score is the corrected quadratic
// loss (1/2) a'S_test a - rho_test'a built from each held-out fold.
CvResult cross_validate_cocolasso(const MatrixXd& v_logcontrasts, const VectorXd& response,
                                  double sigma_u_sq, const CvConfig& cfg);

}  // namespace calib
