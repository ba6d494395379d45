#pragma once

#include <cstdint>
#include <vector>

#include "calib/types.hpp"

namespace calib {

// Multiplicative lognormal noise: observed = truth * u with log u ~ N(-s2u/2, s2u),
// so E(u) = 1 and observations are unbiased for the truth.
struct ErrorModelParams {
  double sigma_u_sq = 0.0;  // variance of log u
  VectorXd mu_x;            // mean of log-abundances
  MatrixXd sigma_x;         // covariance of log-abundances
};

// R repeated measurements of the same n x p truth, aligned by subject/component.
struct ReplicateSet {
  std::vector<CountMatrix> replicates;

  int count() const { return static_cast<int>(replicates.size()); }
};

// Apply w_ij = x_ij * exp(g_ij), g_ij iid N(-sigma_u_sq/2, sigma_u_sq).
// sigma_u_sq = 0 returns the input bit-for-bit.
CountMatrix simulate_contamination(const CountMatrix& truth, double sigma_u_sq,
                                   std::uint64_t rng_seed);

// Noise variance from replicates: grand mean over cells of the per-cell
// sample variance (divisor R-1) of log w across replicates.
double estimate_sigma_u(const ReplicateSet& reps);

// Same, restricted to a subset of columns (0-based indices); used when only
// high-prevalence components are trusted for variance estimation.
double estimate_sigma_u(const ReplicateSet& reps, const std::vector<int>& columns);

// Mean of log-abundances: column means of log w plus the lognormal bias term.
VectorXd estimate_mu_x(const CountMatrix& observed, double sigma_u_sq);

// Covariance of the additive log-ratio errors log(u_ij/u_ip): all contrasts
// share the reference component's noise, giving diagonal 2*s2u and
// off-diagonal s2u.
MatrixXd logratio_error_cov(double sigma_u_sq, Eigen::Index q);

}  // namespace calib
