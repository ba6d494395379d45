#include "calib/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "calib/error_model.hpp"
#include "calib/covariance.hpp"
#include "calib/rng.hpp"

namespace calib {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double kkt_from_residual(const MatrixXd& x, const VectorXd& r, const VectorXd& a,
                         double lambda, double n) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double g = -x.col(j).dot(r) / n;
    const double v = a(j) == 0.0 ? std::max(0.0, std::abs(g) - lambda)
                                 : std::abs(g + lambda * (a(j) > 0.0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace

LassoSolution lasso_fit(const MatrixXd& design, const VectorXd& response, double lambda,
                        double tol, int max_iter, const VectorXd* warm_start) {
  if (!(lambda > 0.0)) throw InvalidInput("lasso_fit: lambda must be positive");
  if (!(tol > 0.0)) throw InvalidInput("lasso_fit: tol must be positive");
  const Eigen::Index n = design.rows(), q = design.cols();
  if (response.size() != n) throw InvalidInput("lasso_fit: dimension mismatch");
  const double nd = static_cast<double>(n);

  VectorXd a = (warm_start && warm_start->size() == q) ? *warm_start : VectorXd::Zero(q);
  VectorXd r = a.isZero(0.0) ? response : VectorXd(response - design * a);
  const VectorXd colnorm = design.colwise().squaredNorm() / nd;

  LassoSolution sol;
  sol.kkt_violation = std::numeric_limits<double>::infinity();

  // Sweeps alternate between the full coordinate set and the current active
  // set: a full sweep recruits coordinates, then restricted sweeps iterate
  // the nonzero ones to convergence cheaply. Convergence is only declared
  // from a quiet full sweep plus the KKT certificate, so the fixed point is
  // the same as plain cyclic descent; every sweep is still a descent sweep.
  std::vector<Eigen::Index> active;
  bool full_pass = true;
  int it = 0;
  while (it < max_iter) {
    ++it;
    double max_delta = 0.0;
    auto update = [&](Eigen::Index j) {
      if (colnorm(j) <= 0.0) {
        if (a(j) != 0.0) { r += design.col(j) * a(j); a(j) = 0.0; }
        return;
      }
      const double z = design.col(j).dot(r) / nd + colnorm(j) * a(j);
      const double next = soft_threshold(z, lambda) / colnorm(j);
      const double d = next - a(j);
      if (d != 0.0) {
        r -= design.col(j) * d;
        a(j) = next;
        max_delta = std::max(max_delta, std::abs(d));
      }
    };
    if (full_pass) {
      for (Eigen::Index j = 0; j < q; ++j) update(j);
      if (max_delta < tol) {
        r = response - design * a;  // refresh cached residual before certifying
        sol.kkt_violation = kkt_from_residual(design, r, a, lambda, nd);
        if (sol.kkt_violation <= 10.0 * tol) { sol.converged = true; break; }
      } else {
        active.clear();
        for (Eigen::Index j = 0; j < q; ++j)
          if (a(j) != 0.0) active.push_back(j);
        full_pass = false;
      }
    } else {
      for (Eigen::Index j : active) update(j);
      if (max_delta < tol) full_pass = true;
    }
  }
  if (!sol.converged) {
    r = response - design * a;
    sol.kkt_violation = kkt_from_residual(design, r, a, lambda, nd);
  }
  sol.coefficients = std::move(a);
  sol.iterations = it;
  sol.objective = 0.5 * r.squaredNorm() / nd + lambda * sol.coefficients.lpNorm<1>();
  return sol;
}

LassoSolution lasso_fit(const LassoProblem& problem, double tol, int max_iter) {
  return lasso_fit(problem.design, problem.response, problem.lambda, tol, max_iter);
}

MatrixXd lasso_path(const MatrixXd& design, const VectorXd& response,
                    const std::vector<double>& grid, double tol, int max_iter) {
  MatrixXd out(design.cols(), static_cast<Eigen::Index>(grid.size()));
  VectorXd warm = VectorXd::Zero(design.cols());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    LassoSolution sol = lasso_fit(design, response, grid[k], tol, max_iter, &warm);
    warm = sol.coefficients;
    out.col(static_cast<Eigen::Index>(k)) = sol.coefficients;
  }
  return out;
}

double kkt_violation(const MatrixXd& design, const VectorXd& response,
                     const VectorXd& coef, double lambda) {
  const VectorXd r = response - design * coef;
  return kkt_from_residual(design, r, coef, lambda, static_cast<double>(design.rows()));
}

std::vector<double> default_lambda_grid(const MatrixXd& design, const VectorXd& response) {
  const double n = static_cast<double>(design.rows());
  const double lam_max = (design.transpose() * response).cwiseAbs().maxCoeff() / n;
  if (!(lam_max > 0.0)) return {1.0};  // degenerate problem; any lambda gives the null fit
  constexpr int kPoints = 50;
  constexpr double kRatio = 1e-3;
  std::vector<double> grid(kPoints);
  const double lo = std::log(lam_max * kRatio), hi = std::log(lam_max);
  for (int i = 0; i < kPoints; ++i)
    grid[i] = std::exp(hi + (lo - hi) * i / (kPoints - 1));
  return grid;
}

namespace {

// deterministic strided fold assignment over a seeded shuffle
std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n, int folds,
                                                  std::uint64_t seed) {
  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng = make_rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<Eigen::Index>> out(folds);
  for (Eigen::Index i = 0; i < n; ++i) out[i % folds].push_back(perm[i]);
  return out;
}

MatrixXd take_rows(const MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = m.row(rows[i]);
  return out;
}

VectorXd take_rows(const VectorXd& v, const std::vector<Eigen::Index>& rows) {
  VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(i) = v(rows[i]);
  return out;
}

std::size_t argmin_strict(const std::vector<double>& curve) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < curve.size(); ++k)
    if (curve[k] < curve[best]) best = k;  // strict: ties keep the larger lambda
  return best;
}

}  // namespace

CvResult cross_validate_lambda(const MatrixXd& design, const VectorXd& response,
                               const CvConfig& cfg) {
  const Eigen::Index n = design.rows();
  if (cfg.folds < 2) throw InvalidInput("cross_validate_lambda: folds < 2");
  if (n < cfg.folds) throw InvalidInput("cross_validate_lambda: fewer rows than folds");
  const std::vector<double> grid =
      cfg.lambda_grid.empty() ? default_lambda_grid(design, response) : cfg.lambda_grid;

  std::vector<double> sse(grid.size(), 0.0);
  const auto folds = make_folds(n, cfg.folds, cfg.seed);
  for (const auto& test : folds) {
    std::vector<Eigen::Index> train;
    train.reserve(n - test.size());
    std::vector<char> is_test(n, 0);
    for (Eigen::Index i : test) is_test[i] = 1;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!is_test[i]) train.push_back(i);

    const MatrixXd xtr = take_rows(design, train), xte = take_rows(design, test);
    const VectorXd ytr = take_rows(response, train), yte = take_rows(response, test);
    // Exploration tolerance: fold fits only rank penalties, so they run at a
    // looser tol than the contractual final fit.
    const MatrixXd path = lasso_path(xtr, ytr, grid, 1e-5);
    for (std::size_t k = 0; k < grid.size(); ++k)
      sse[k] += (yte - xte * path.col(static_cast<Eigen::Index>(k))).squaredNorm();
  }
  for (double& s : sse) s /= static_cast<double>(n);

  CvResult res;
  res.cv_curve = std::move(sse);
  res.lambda_star = grid[argmin_strict(res.cv_curve)];
  return res;
}

ScaledLassoSolution scaled_lasso(const MatrixXd& design, const VectorXd& response,
                                 double lambda_tilde) {
  if (!(lambda_tilde > 0.0)) throw InvalidInput("scaled_lasso: lambda_tilde must be positive");
  const double n = static_cast<double>(design.rows());
  ScaledLassoSolution out;
  out.lambda_tilde = lambda_tilde;
  out.coefficients = VectorXd::Zero(design.cols());
  double sigma = response.norm() / std::sqrt(n);
  if (sigma == 0.0) { out.sigma_hat = 0.0; return out; }  // zero response: null fit

  for (int round = 0; round < 500; ++round) {
    LassoSolution sol = lasso_fit(design, response, sigma * lambda_tilde, 1e-7, 100000,
                                  &out.coefficients);
    out.coefficients = sol.coefficients;
    const double next = (response - design * out.coefficients).norm() / std::sqrt(n);
    const bool done = std::abs(next - sigma) < 1e-8;
    sigma = next;
    if (done) {
      out.sigma_hat = sigma;
      return out;
    }
  }
  throw NotConverged("scaled_lasso: noise-scale alternation did not settle in 500 rounds");
}

namespace {

struct QuadraticProblem {
  MatrixXd s;     // corrected, PSD-projected Gram surrogate
  VectorXd rho;   // V'y/n on centered data
};

QuadraticProblem corrected_gram(const MatrixXd& vc, const VectorXd& yc, double sigma_u_sq) {
  const double n = static_cast<double>(vc.rows());
  QuadraticProblem qp;
  qp.s = psd_repair(vc.transpose() * vc / n - logratio_error_cov(sigma_u_sq, vc.cols()), 0.0);
  qp.rho = vc.transpose() * yc / n;
  return qp;
}

// coordinate descent on (1/2) a'Sa - rho'a + lambda ||a||_1
LassoSolution quadratic_lasso(const QuadraticProblem& qp, double lambda, double tol,
                              int max_iter, const VectorXd* warm_start) {
  const Eigen::Index q = qp.rho.size();
  VectorXd a = (warm_start && warm_start->size() == q) ? *warm_start : VectorXd::Zero(q);
  VectorXd h = qp.s * a;  // running S*a

  LassoSolution sol;
  sol.kkt_violation = std::numeric_limits<double>::infinity();

  // Same full/restricted sweep alternation as lasso_fit.
  std::vector<Eigen::Index> active;
  bool full_pass = true;
  int it = 0;
  while (it < max_iter) {
    ++it;
    double max_delta = 0.0;
    auto update = [&](Eigen::Index j) {
      const double sjj = qp.s(j, j);
      if (sjj <= 0.0) {
        if (a(j) != 0.0) { h -= qp.s.col(j) * a(j); a(j) = 0.0; }
        return;
      }
      const double z = qp.rho(j) - h(j) + sjj * a(j);
      const double next = soft_threshold(z, lambda) / sjj;
      const double d = next - a(j);
      if (d != 0.0) {
        h += qp.s.col(j) * d;
        a(j) = next;
        max_delta = std::max(max_delta, std::abs(d));
      }
    };
    if (full_pass) {
      for (Eigen::Index j = 0; j < q; ++j) update(j);
    } else {
      for (Eigen::Index j : active) update(j);
    }
    // The corrected loss can be unbounded below when S is rank-deficient and
    // lambda is small; coefficients then drift without converging. Bail out
    // once the iterate is clearly diverging instead of burning the budget.
    if (a.lpNorm<Eigen::Infinity>() > 1e8) break;
    if (full_pass) {
      if (max_delta < tol) {
        h = qp.s * a;  // refresh before certifying
        double worst = 0.0;
        for (Eigen::Index j = 0; j < q; ++j) {
          const double g = h(j) - qp.rho(j);
          const double v = a(j) == 0.0 ? std::max(0.0, std::abs(g) - lambda)
                                       : std::abs(g + lambda * (a(j) > 0.0 ? 1.0 : -1.0));
          worst = std::max(worst, v);
        }
        sol.kkt_violation = worst;
        if (worst <= 10.0 * tol) { sol.converged = true; break; }
      } else {
        active.clear();
        for (Eigen::Index j = 0; j < q; ++j)
          if (a(j) != 0.0) active.push_back(j);
        full_pass = false;
      }
    } else if (max_delta < tol) {
      full_pass = true;
    }
  }
  sol.coefficients = std::move(a);
  sol.iterations = it;
  sol.objective = 0.5 * sol.coefficients.dot(qp.s * sol.coefficients) -
                  qp.rho.dot(sol.coefficients) +
                  lambda * sol.coefficients.lpNorm<1>();
  return sol;
}

}  // namespace

LassoSolution cocolasso_fit(const MatrixXd& v_logcontrasts, const VectorXd& response,
                            double sigma_u_sq, double lambda_star) {
  if (!(lambda_star > 0.0)) throw InvalidInput("cocolasso_fit: lambda_star must be positive");
  const MatrixXd vc = v_logcontrasts.rowwise() - v_logcontrasts.colwise().mean();
  const VectorXd yc = response.array() - response.mean();
  const QuadraticProblem qp = corrected_gram(vc, yc, sigma_u_sq);
  return quadratic_lasso(qp, lambda_star, 1e-7, 100000, nullptr);
}

CvResult cross_validate_cocolasso(const MatrixXd& v_logcontrasts, const VectorXd& response,
                                  double sigma_u_sq, const CvConfig& cfg) {
  const Eigen::Index n = v_logcontrasts.rows();
  if (cfg.folds < 2) throw InvalidInput("cross_validate_cocolasso: folds < 2");
  if (n < cfg.folds) throw InvalidInput("cross_validate_cocolasso: fewer rows than folds");
  const MatrixXd vc = v_logcontrasts.rowwise() - v_logcontrasts.colwise().mean();
  const VectorXd yc = response.array() - response.mean();
  const std::vector<double> grid =
      cfg.lambda_grid.empty() ? default_lambda_grid(vc, yc) : cfg.lambda_grid;

  std::vector<double> score(grid.size(), 0.0);
  const auto folds = make_folds(n, cfg.folds, cfg.seed);
  for (const auto& test : folds) {
    std::vector<Eigen::Index> train;
    train.reserve(n - test.size());
    std::vector<char> is_test(n, 0);
    for (Eigen::Index i : test) is_test[i] = 1;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!is_test[i]) train.push_back(i);

    const QuadraticProblem qtr =
        corrected_gram(take_rows(vc, train), take_rows(yc, train), sigma_u_sq);
    const QuadraticProblem qte =
        corrected_gram(take_rows(vc, test), take_rows(yc, test), sigma_u_sq);
    VectorXd warm = VectorXd::Zero(vc.cols());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      // Exploration fits get a looser tol and a reduced sweep budget: on
      // rank-deficient folds the corrected loss is unbounded for small
      // lambda, and such penalties score badly on the held-out loss anyway.
      LassoSolution sol = quadratic_lasso(qtr, grid[k], 1e-5, 300, &warm);
      if (sol.coefficients.lpNorm<Eigen::Infinity>() > 1e7) {
        // Diverging: every smaller lambda is unbounded on this fold too.
        for (std::size_t k2 = k; k2 < grid.size(); ++k2)
          score[k2] = std::numeric_limits<double>::infinity();
        break;
      }
      warm = sol.coefficients;
      score[k] += 0.5 * warm.dot(qte.s * warm) - qte.rho.dot(warm);
    }
  }

  CvResult res;
  res.cv_curve = std::move(score);
  res.lambda_star = grid[argmin_strict(res.cv_curve)];
  return res;
}

}  // namespace calib
