#include "calib/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "calib/composition.hpp"
#include "calib/inference.hpp"
#include "calib/lasso.hpp"
#include "calib/rng.hpp"

namespace calib {

VectorXd default_alpha(int p) {
  VectorXd a = VectorXd::Zero(p - 1);
  const double head[] = {1.0, -0.8, 1.5, 0.6, -0.9, 1.2, 0.4};
  for (int j = 0; j < 7 && j < p - 1; ++j) a(j) = head[j];
  return a;
}

VectorXd SimulationScenario::mu_x() const {
  VectorXd mu = VectorXd::Zero(p);
  for (int j = 0; j < 5 && j < p; ++j) mu(j) = std::log(p / 2.0);
  return mu;
}

MatrixXd SimulationScenario::sigma_x() const {
  MatrixXd s(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) s(i, j) = std::pow(rho, std::abs(i - j));
  return s;
}

VectorXd SimulationScenario::effective_alpha() const {
  if (alpha_true.size() == 0) return default_alpha(p);
  if (alpha_true.size() != p - 1)
    throw InvalidInput("SimulationScenario: alpha_true must have length p-1");
  return alpha_true;
}

SimulatedDataset generate_dataset(const SimulationScenario& sc, int replicate_index) {
  if (sc.n < 2 || sc.p < 2) throw InvalidInput("generate_dataset: need n >= 2, p >= 2");
  if (!(std::abs(sc.rho) < 1.0)) throw InvalidInput("generate_dataset: |rho| must be < 1");
  const int n = sc.n, p = sc.p;
  const VectorXd mu = sc.mu_x();
  const VectorXd alpha = sc.effective_alpha();

  Rng rng = make_rng(sc.seed, static_cast<std::uint64_t>(replicate_index));
  std::normal_distribution<double> std_normal(0.0, 1.0);

  // AR(1) latent log-abundances by the exact sequential recurrence
  SimulatedDataset ds;
  ds.logx_truth.resize(n, p);
  const double carry = std::sqrt(1.0 - sc.rho * sc.rho);
  for (int i = 0; i < n; ++i) {
    ds.logx_truth(i, 0) = std_normal(rng);
    for (int j = 1; j < p; ++j)
      ds.logx_truth(i, j) = sc.rho * ds.logx_truth(i, j - 1) + carry * std_normal(rng);
  }
  ds.logx_truth.rowwise() += mu.transpose();

  // true log-ratios against the last component
  ds.ztilde_truth = ds.logx_truth.leftCols(p - 1).colwise() - ds.logx_truth.col(p - 1);

  ds.y.values = ds.ztilde_truth * alpha;
  for (int i = 0; i < n; ++i) ds.y.values(i) += sc.sigma_eps * std_normal(rng);
  ds.y.centered = false;

  CountMatrix truth;
  truth.values = ds.logx_truth.array().exp().matrix();
  const int copies = 1 + sc.n_replicate_obs;
  const std::uint64_t base = mix_seed(sc.seed, static_cast<std::uint64_t>(replicate_index));
  ds.replicates.reserve(copies);
  for (int r = 0; r < copies; ++r)
    ds.replicates.push_back(simulate_contamination(
        truth, sc.sigma_u_sq, mix_seed(base, 0x7e50u + static_cast<std::uint64_t>(r))));
  ds.w = ds.replicates.front();
  return ds;
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct ReplicateRecord {
  bool ok = false;
  VectorXd lasso, coco;
  VectorXd delasso, delasso_se;
  VectorXd proposed, proposed_se;
};

ReplicateRecord run_one(const SimulationScenario& sc, int rep,
                        const LogContrastNuisance* oracle) {
  ReplicateRecord rec;
  const SimulatedDataset ds = generate_dataset(sc, rep);
  const LogContrastMatrix vt = log_contrast(close(ds.w), sc.p);

  LogContrastNuisance nu;
  if (oracle) {
    nu = *oracle;
  } else {
    ReplicateSet reps;
    reps.replicates = ds.replicates;
    const double s2u_hat = estimate_sigma_u(reps);
    const VectorXd mu_hat = estimate_mu_x(ds.w, s2u_hat);
    const MatrixXd logw = ds.w.values.array().log().matrix();
    CovarianceEstimate cov;
    if (sc.cov_estimator == CovarianceEstimate::Method::nodewise)
      cov = nodewise_covariance(logw, s2u_hat, default_nodewise_lambda(logw));
    else
      cov = shrinkage_covariance(logw, s2u_hat);
    nu = to_logcontrast_nuisance(mu_hat, cov.matrix, s2u_hat, sc.p);
  }

  CvConfig cv;
  cv.folds = 5;
  cv.seed = mix_seed(sc.seed, 0xCF00u + static_cast<std::uint64_t>(rep));

  const MatrixXd vc = vt.values.rowwise() - vt.values.colwise().mean();
  const VectorXd yc = ds.y.values.array() - ds.y.values.mean();

  const CvResult cv_lasso = cross_validate_lambda(vc, yc, cv);
  rec.lasso = lasso_fit(vc, yc, cv_lasso.lambda_star).coefficients;

  const CvResult cv_coco = cross_validate_cocolasso(vt.values, ds.y.values, sc.sigma_u_sq, cv);
  rec.coco = cocolasso_fit(vt.values, ds.y.values, sc.sigma_u_sq, cv_coco.lambda_star)
                 .coefficients;

  const DebiasedEstimate dl = fit_debiased_lasso(vt.values, ds.y.values, cv);
  rec.delasso = dl.alpha_hat;
  rec.delasso_se = dl.se;

  const DebiasedEstimate pr = fit_proposed(vt.values, ds.y.values, nu, cv);
  rec.proposed = pr.alpha_hat;
  rec.proposed_se = pr.se;

  rec.ok = true;
  return rec;
}

MethodSummary summarize(const std::vector<const VectorXd*>& draws,
                        const std::vector<const VectorXd*>& ses,
                        const VectorXd& alpha, double z) {
  const Eigen::Index q = alpha.size();
  const double nn = static_cast<double>(draws.size());
  MethodSummary ms;
  ms.has_inference = !ses.empty();
  ms.bias = VectorXd::Zero(q);
  ms.rmse = VectorXd::Zero(q);
  ms.empirical_sd = VectorXd::Zero(q);
  ms.mean_model_se = VectorXd::Constant(q, kNan);
  ms.coverage_rate = VectorXd::Constant(q, kNan);

  VectorXd mean = VectorXd::Zero(q);
  for (const VectorXd* d : draws) mean += *d;
  mean /= nn;
  ms.bias = mean - alpha;
  VectorXd ss = VectorXd::Zero(q), se_sum = VectorXd::Zero(q), hits = VectorXd::Zero(q);
  for (std::size_t k = 0; k < draws.size(); ++k) {
    const VectorXd& d = *draws[k];
    ss += (d - mean).cwiseAbs2();
    if (ms.has_inference) {
      const VectorXd& s = *ses[k];
      se_sum += s;
      for (Eigen::Index j = 0; j < q; ++j)
        if (std::abs(d(j) - alpha(j)) <= z * s(j)) hits(j) += 1.0;
    }
  }
  ms.empirical_sd = (ss / (nn - 1.0)).cwiseSqrt();
  ms.rmse = (ms.bias.cwiseAbs2() + ss / nn).cwiseSqrt();
  if (ms.has_inference) {
    ms.mean_model_se = se_sum / nn;
    ms.coverage_rate = hits / nn;
  }
  return ms;
}

}  // namespace

SummaryTable run_scenario(const SimulationScenario& sc, int threads) {
  if (sc.n_mc < 1) throw InvalidInput("run_scenario: n_mc < 1");
  const VectorXd alpha = sc.effective_alpha();

  LogContrastNuisance oracle;
  const bool use_oracle = sc.nuisance_mode == SimulationScenario::NuisanceMode::oracle;
  if (use_oracle)
    oracle = to_logcontrast_nuisance(sc.mu_x(), sc.sigma_x(), sc.sigma_u_sq, sc.p);

  std::vector<ReplicateRecord> records(sc.n_mc);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= sc.n_mc) break;
      try {
        records[rep] = run_one(sc, rep, use_oracle ? &oracle : nullptr);
      } catch (const Error&) {
        records[rep].ok = false;
      }
    }
  };
  const int nthreads = std::max(1, threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<const VectorXd*> lasso, coco, delasso, proposed, delasso_se, proposed_se;
  int failed = 0;
  for (const ReplicateRecord& r : records) {
    if (!r.ok) { ++failed; continue; }
    lasso.push_back(&r.lasso);
    coco.push_back(&r.coco);
    delasso.push_back(&r.delasso);
    delasso_se.push_back(&r.delasso_se);
    proposed.push_back(&r.proposed);
    proposed_se.push_back(&r.proposed_se);
  }
  if (failed > 0 && failed * 20 > sc.n_mc)
    throw ScenarioUnstable("run_scenario: " + std::to_string(failed) + " of " +
                           std::to_string(sc.n_mc) + " replicates failed");
  if (lasso.empty()) throw ScenarioUnstable("run_scenario: no replicate completed");

  const double z = normal_quantile(0.975);
  SummaryTable table;
  table.alpha_true = alpha;
  table.n_mc_completed = static_cast<int>(lasso.size());
  table.n_failed = failed;
  table.methods["lasso"] = summarize(lasso, {}, alpha, z);
  table.methods["cocolasso"] = summarize(coco, {}, alpha, z);
  table.methods["debiased_lasso"] = summarize(delasso, delasso_se, alpha, z);
  table.methods["proposed"] = summarize(proposed, proposed_se, alpha, z);
  return table;
}

}  // namespace calib
