#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace calib::cli {

// simulate: run a Monte Carlo scenario from a config file and write the
// per-coefficient summary (CSV + JSON sidecar) into out_dir.
struct SimulateOptions {
  std::string config_path;
  int n_mc_override = 0;        // <= 0 means "use config value"
  long long seed_override = -1; // < 0 means "use config value"
  std::string out_dir;
  int threads = 1;
};
int cmd_simulate(const SimulateOptions& opt);

// analyze / estimate-nuisance share their input plumbing.
struct AnalysisOptions {
  std::string counts_path;
  std::vector<std::string> replicate_paths;
  std::string response_path;
  std::string reference;          // column name or 1-based index; empty = last
  std::string cov_estimator = "shrinkage";
  double zero_impute = 0.1;
  double level = 0.95;
  int cv_folds = 10;
  std::uint64_t seed = 0;
  std::string nuisance_file;      // optional pre-estimated bundle (analyze only)
  std::string sigma_u_columns;    // optional mask: comma-separated names/indices
  std::string out_path;           // directory (analyze) or JSON file (estimate)
};
int cmd_analyze(const AnalysisOptions& opt);
int cmd_estimate_nuisance(const AnalysisOptions& opt);

// make-data: synthetic dataset with the documented real-data shape
// (counts + replicate files + response + generating truth).
struct MakeDataOptions {
  int n = 41;
  int p = 40;
  int replicates = 4;
  double sigma_u_sq = 1.16;
  double rho = 0.2;
  double sigma_eps = 0.5;
  std::uint64_t seed = 1;
  std::string out_dir;
};
int cmd_make_data(const MakeDataOptions& opt);

}  // namespace calib::cli
