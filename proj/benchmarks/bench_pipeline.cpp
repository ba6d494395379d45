// Microbenchmarks for the hot paths of the estimation pipeline: the Lasso
// solver over a penalty path, calibration of a noisy design, the node-wise
// covariance estimator, and the PSD repair step.

#include <benchmark/benchmark.h>

#include <random>

#include "calib/calibration.hpp"
#include "calib/composition.hpp"
#include "calib/covariance.hpp"
#include "calib/lasso.hpp"
#include "calib/montecarlo.hpp"

namespace {

using namespace calib;

SimulationScenario bench_scenario(int n, int p) {
  SimulationScenario sc;
  sc.n = n;
  sc.p = p;
  sc.seed = 7;
  return sc;
}

// Centered noisy log-ratio design and response for one simulated dataset.
struct BenchData {
  MatrixXd v;
  VectorXd y;
  LogContrastNuisance nuisance;
};

BenchData make_bench_data(int n, int p) {
  const SimulationScenario sc = bench_scenario(n, p);
  const SimulatedDataset data = generate_dataset(sc, 0);
  BenchData out;
  out.v = log_contrast(close(data.w), p).values;
  out.y = data.y.values;
  out.nuisance = to_logcontrast_nuisance(sc.mu_x(), sc.sigma_x(), sc.sigma_u_sq, p);
  return out;
}

void BM_LassoPath(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int p = static_cast<int>(state.range(1));
  const BenchData data = make_bench_data(n, p);
  MatrixXd vc = data.v;
  vc.rowwise() -= data.v.colwise().mean();
  VectorXd yc = data.y.array() - data.y.mean();
  const std::vector<double> grid = default_lambda_grid(vc, yc);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lasso_path(vc, yc, grid));
  }
}
BENCHMARK(BM_LassoPath)->Args({100, 100})->Args({200, 300})->Unit(benchmark::kMillisecond);

void BM_BuildDesign(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int p = static_cast<int>(state.range(1));
  const BenchData data = make_bench_data(n, p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_design(data.v, data.nuisance));
  }
}
BENCHMARK(BM_BuildDesign)->Args({100, 100})->Args({200, 300})->Unit(benchmark::kMillisecond);

void BM_NodewiseCovariance(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int p = static_cast<int>(state.range(1));
  const SimulationScenario sc = bench_scenario(n, p);
  const SimulatedDataset data = generate_dataset(sc, 0);
  const MatrixXd log_counts = data.w.values.array().log().matrix();
  const double lambda = default_nodewise_lambda(log_counts);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nodewise_covariance(log_counts, sc.sigma_u_sq, lambda));
  }
}
BENCHMARK(BM_NodewiseCovariance)->Args({100, 50})->Args({100, 100})->Unit(benchmark::kMillisecond);

void BM_PsdRepair(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  // indefinite symmetric input so the repair path does real work
  MatrixXd m(p, p);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = gauss(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(psd_repair(m, 1e-8));
  }
}
BENCHMARK(BM_PsdRepair)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
