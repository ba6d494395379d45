#include "calib/error_model.hpp"

#include <cmath>

#include "calib/rng.hpp"

namespace calib {

CountMatrix simulate_contamination(const CountMatrix& truth, double sigma_u_sq,
                                   std::uint64_t rng_seed) {
  if (sigma_u_sq < 0.0) throw InvalidInput("simulate_contamination: sigma_u_sq < 0");
  if (sigma_u_sq == 0.0) return truth;
  Rng rng = make_rng(rng_seed);
  std::normal_distribution<double> normal(-0.5 * sigma_u_sq, std::sqrt(sigma_u_sq));
  CountMatrix out = truth;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out.values(i, j) *= std::exp(normal(rng));
  return out;
}

namespace {

double replicate_log_variances(const ReplicateSet& reps, const std::vector<int>& columns) {
  const int R = reps.count();
  if (R < 2) throw InsufficientReplicates("estimate_sigma_u: need at least 2 replicates");
  const Eigen::Index n = reps.replicates[0].rows();
  const Eigen::Index p = reps.replicates[0].cols();
  for (const auto& rep : reps.replicates)
    if (rep.rows() != n || rep.cols() != p)
      throw InvalidInput("estimate_sigma_u: replicate dimensions differ");
  for (int j : columns)
    if (j < 0 || j >= p) throw InvalidInput("estimate_sigma_u: column index out of range");

  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j : columns) {
      // An all-equal cell has zero variance exactly; skipping the arithmetic
      // avoids the 1-ulp mean rounding that would otherwise leak through as a
      // spurious ~1e-33 variance on noise-free data.
      bool constant = true;
      const double first = reps.replicates[0].values(i, j);
      for (const auto& rep : reps.replicates)
        if (rep.values(i, j) != first) { constant = false; break; }
      if (constant) continue;
      double mean = 0.0;
      for (const auto& rep : reps.replicates) mean += std::log(rep.values(i, j));
      mean /= R;
      double ss = 0.0;
      for (const auto& rep : reps.replicates) {
        const double d = std::log(rep.values(i, j)) - mean;
        ss += d * d;
      }
      acc += ss / (R - 1);
    }
  }
  return acc / (static_cast<double>(n) * static_cast<double>(columns.size()));
}

}  // namespace

double estimate_sigma_u(const ReplicateSet& reps) {
  if (reps.count() < 2) throw InsufficientReplicates("estimate_sigma_u: need at least 2 replicates");
  std::vector<int> all(static_cast<std::size_t>(reps.replicates[0].cols()));
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<int>(j);
  return replicate_log_variances(reps, all);
}

double estimate_sigma_u(const ReplicateSet& reps, const std::vector<int>& columns) {
  if (columns.empty()) throw InvalidInput("estimate_sigma_u: empty column subset");
  return replicate_log_variances(reps, columns);
}

VectorXd estimate_mu_x(const CountMatrix& observed, double sigma_u_sq) {
  MatrixXd lw = observed.values.array().log().matrix();
  VectorXd mu = lw.colwise().mean().transpose();
  mu.array() += 0.5 * sigma_u_sq;
  return mu;
}

MatrixXd logratio_error_cov(double sigma_u_sq, Eigen::Index q) {
  return sigma_u_sq * (MatrixXd::Identity(q, q) + MatrixXd::Ones(q, q));
}

}  // namespace calib
