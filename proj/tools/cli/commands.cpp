#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "calib/calibration.hpp"
#include "calib/composition.hpp"
#include "calib/covariance.hpp"
#include "calib/error_model.hpp"
#include "calib/inference.hpp"
#include "calib/montecarlo.hpp"
#include "io.hpp"

namespace calib::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kArtifactVersion = "0.1.0";

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

json vector_to_json(const VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_to_json(const MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

VectorXd vector_from_json(const json& j, const std::string& key) {
  if (!j.is_array()) throw InvalidInput("nuisance field '" + key + "': expected an array");
  VectorXd out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw InvalidInput("nuisance field '" + key + "': expected numbers");
    out(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return out;
}

MatrixXd matrix_from_json(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty())
    throw InvalidInput("nuisance field '" + key + "': expected a nonempty 2-d array");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  MatrixXd out(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw InvalidInput("nuisance field '" + key + "': ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number())
        throw InvalidInput("nuisance field '" + key + "': expected numbers");
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
    }
  }
  return out;
}

void write_json_file(const std::string& path, const json& doc) {
  write_file(path, doc.dump(2) + "\n");
}

}  // namespace

// ---------------------------------------------------------------------------
// simulate

namespace {

const char* method_label(const std::string& key) {
  // stable display order and labels for the four methods
  if (key == "lasso") return "lasso";
  if (key == "cocolasso") return "cocolasso";
  if (key == "debiased_lasso") return "debiased_lasso";
  return "proposed";
}

void write_summary_csv(const std::string& path, const SummaryTable& table) {
  static const char* kOrder[] = {"lasso", "cocolasso", "debiased_lasso", "proposed"};
  std::ostringstream out;
  out << "method,coefficient,alpha_true,bias,rmse,mean_model_se,empirical_sd,coverage_rate\n";
  for (const char* key : kOrder) {
    const auto it = table.methods.find(key);
    if (it == table.methods.end()) continue;
    const MethodSummary& ms = it->second;
    for (Eigen::Index j = 0; j < ms.bias.size(); ++j) {
      out << method_label(key) << ',' << (j + 1) << ',' << format_double(table.alpha_true(j))
          << ',' << format_double(ms.bias(j)) << ',' << format_double(ms.rmse(j)) << ','
          << cell(ms.mean_model_se(j)) << ',' << format_double(ms.empirical_sd(j)) << ','
          << cell(ms.coverage_rate(j)) << "\n";
    }
  }
  write_file(path, out.str());
}

void print_summary_table(const SummaryTable& table) {
  static const char* kOrder[] = {"lasso", "cocolasso", "debiased_lasso", "proposed"};
  const Eigen::Index q = table.alpha_true.size();
  const Eigen::Index show = std::min<Eigen::Index>(q, 10);
  std::printf("%-6s %-15s %9s %9s %9s %9s %9s\n", "coef", "method", "bias", "rmse",
              "se(model)", "sd(emp)", "coverage");
  for (Eigen::Index j = 0; j < show; ++j) {
    for (const char* key : kOrder) {
      const auto it = table.methods.find(key);
      if (it == table.methods.end()) continue;
      const MethodSummary& ms = it->second;
      auto num = [](double v) {
        char buf[16];
        if (std::isfinite(v))
          std::snprintf(buf, sizeof(buf), "%9.3f", v);
        else
          std::snprintf(buf, sizeof(buf), "%9s", "-");
        return std::string(buf);
      };
      std::printf("a%-5lld %-15s %s %s %s %s %s\n", static_cast<long long>(j + 1),
                  method_label(key), num(ms.bias(j)).c_str(), num(ms.rmse(j)).c_str(),
                  num(ms.mean_model_se(j)).c_str(), num(ms.empirical_sd(j)).c_str(),
                  num(ms.coverage_rate(j)).c_str());
    }
  }
  if (show < q) std::printf("... %lld further coefficients in summary.csv\n",
                            static_cast<long long>(q - show));
}

}  // namespace

int cmd_simulate(const SimulateOptions& opt) {
  ScenarioConfig cfg = load_scenario_config(opt.config_path);
  SimulationScenario& sc = cfg.scenario;
  if (opt.n_mc_override > 0) sc.n_mc = opt.n_mc_override;
  if (opt.seed_override >= 0) sc.seed = static_cast<std::uint64_t>(opt.seed_override);

  fs::create_directories(opt.out_dir);
  const SummaryTable table = run_scenario(sc, opt.threads);

  write_summary_csv((fs::path(opt.out_dir) / "summary.csv").string(), table);

  json meta;
  meta["schema_version"] = 1;
  meta["version"] = kArtifactVersion;
  meta["n"] = sc.n;
  meta["p"] = sc.p;
  meta["rho"] = sc.rho;
  meta["sigma_u_sq"] = sc.sigma_u_sq;
  meta["sigma_eps"] = sc.sigma_eps;
  meta["alpha"] = vector_to_json(sc.effective_alpha());
  meta["n_replicate_obs"] = sc.n_replicate_obs;
  meta["nuisance_mode"] =
      sc.nuisance_mode == SimulationScenario::NuisanceMode::oracle ? "oracle" : "estimated";
  meta["cov_estimator"] =
      sc.cov_estimator == CovarianceEstimate::Method::nodewise ? "nodewise" : "shrinkage";
  meta["n_mc"] = sc.n_mc;
  meta["seed"] = sc.seed;
  meta["n_mc_completed"] = table.n_mc_completed;
  meta["n_failed"] = table.n_failed;
  meta["threads"] = opt.threads;
  write_json_file((fs::path(opt.out_dir) / "metadata.json").string(), meta);

  print_summary_table(table);
  return 0;
}

// ---------------------------------------------------------------------------
// analyze / estimate-nuisance

namespace {

// Inputs after validation: imputed counts, imputed replicates, response,
// resolved reference.
struct LoadedInputs {
  std::vector<std::string> names;   // all p component names
  CountMatrix counts;               // imputed working counts
  ReplicateSet replicates;          // imputed replicate matrices
  VectorXd response;
  int reference_index = 0;          // 1-based
  std::string reference_name;
  std::vector<std::string> contrast_names;  // names minus the reference
};

// Replace exact zeros by the imputation value; reject negatives via the
// CountMatrix constructor downstream. Warns on all-zero columns.
MatrixXd impute_zeros(const NamedMatrix& m, double value, const std::string& path) {
  MatrixXd out = m.values;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    bool all_zero = out.rows() > 0;
    for (Eigen::Index i = 0; i < out.rows(); ++i)
      if (out(i, j) != 0.0) { all_zero = false; break; }
    if (all_zero)
      std::cerr << "warning: " << path << ": column '" << m.names[static_cast<std::size_t>(j)]
                << "' is all zeros; every entry imputed to " << format_double(value) << "\n";
  }
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      if (out(i, j) == 0.0) out(i, j) = value;
  return out;
}

int resolve_reference(const std::vector<std::string>& names, const std::string& ref) {
  if (ref.empty()) return static_cast<int>(names.size());
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] == ref) return static_cast<int>(j) + 1;
  char* end = nullptr;
  const long idx = std::strtol(ref.c_str(), &end, 10);
  if (end == ref.c_str() + ref.size() && idx >= 1 &&
      idx <= static_cast<long>(names.size()))
    return static_cast<int>(idx);
  throw InvalidInput("reference component '" + ref + "' matches no column name or index");
}

std::vector<int> resolve_column_mask(const std::vector<std::string>& names,
                                     const std::string& mask) {
  std::vector<int> out;
  std::istringstream in(mask);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(resolve_reference(names, tok) - 1);  // same name-or-index rule
  }
  if (out.empty()) throw InvalidInput("sigma-u column mask is empty");
  return out;
}

LoadedInputs load_inputs(const AnalysisOptions& opt) {
  if (opt.zero_impute <= 0) throw InvalidInput("--impute must be positive");
  if (opt.replicate_paths.size() < 2)
    throw InsufficientReplicates("need at least 2 replicate files to estimate the noise variance, got " +
                                 std::to_string(opt.replicate_paths.size()));

  LoadedInputs out;
  const NamedMatrix counts = read_csv_matrix(opt.counts_path);
  out.names = counts.names;
  for (std::size_t a = 0; a < out.names.size(); ++a)
    for (std::size_t b = a + 1; b < out.names.size(); ++b)
      if (out.names[a] == out.names[b])
        throw InvalidInput(opt.counts_path + ": duplicate column name '" + out.names[a] + "'");

  out.counts = CountMatrix(impute_zeros(counts, opt.zero_impute, opt.counts_path));

  for (const std::string& path : opt.replicate_paths) {
    const NamedMatrix rep = read_csv_matrix(path);
    if (rep.names != counts.names)
      throw InvalidInput(path + ": column names differ from " + opt.counts_path);
    if (rep.values.rows() != counts.values.rows())
      throw InvalidInput(path + ": has " + std::to_string(rep.values.rows()) +
                         " rows, counts file has " + std::to_string(counts.values.rows()));
    out.replicates.replicates.emplace_back(impute_zeros(rep, opt.zero_impute, path));
  }

  out.response = read_csv_column(opt.response_path);
  if (out.response.size() != counts.values.rows())
    throw InvalidInput(opt.response_path + ": has " + std::to_string(out.response.size()) +
                       " rows, counts file has " + std::to_string(counts.values.rows()));

  out.reference_index = resolve_reference(out.names, opt.reference);
  out.reference_name = out.names[static_cast<std::size_t>(out.reference_index - 1)];
  for (std::size_t j = 0; j < out.names.size(); ++j)
    if (static_cast<int>(j) + 1 != out.reference_index)
      out.contrast_names.push_back(out.names[j]);
  return out;
}

// Everything analyze needs about the nuisance, in both scales, serializable.
struct NuisanceBundle {
  double sigma_u_sq = 0.0;
  VectorXd mu_x;
  MatrixXd sigma_x;
  std::string cov_method;
  bool psd_repaired = false;
  int reference_index = 0;  // 1-based
  std::string reference_name;
  std::vector<std::string> component_names;
  VectorXd mu_ztilde;
  MatrixXd sigma_ztilde;
};

NuisanceBundle estimate_bundle(const LoadedInputs& in, const AnalysisOptions& opt) {
  NuisanceBundle out;
  if (!opt.sigma_u_columns.empty())
    out.sigma_u_sq =
        estimate_sigma_u(in.replicates, resolve_column_mask(in.names, opt.sigma_u_columns));
  else
    out.sigma_u_sq = estimate_sigma_u(in.replicates);

  out.mu_x = estimate_mu_x(in.counts, out.sigma_u_sq);

  const MatrixXd log_counts = in.counts.values.array().log().matrix();
  CovarianceEstimate cov;
  if (opt.cov_estimator == "nodewise")
    cov = nodewise_covariance(log_counts, out.sigma_u_sq, default_nodewise_lambda(log_counts));
  else if (opt.cov_estimator == "shrinkage")
    cov = shrinkage_covariance(log_counts, out.sigma_u_sq);
  else
    throw InvalidInput("--cov must be nodewise or shrinkage, got '" + opt.cov_estimator + "'");
  out.sigma_x = cov.matrix;
  out.cov_method = opt.cov_estimator;
  out.psd_repaired = cov.psd_repaired;

  out.reference_index = in.reference_index;
  out.reference_name = in.reference_name;
  out.component_names = in.names;

  const LogContrastNuisance nu =
      to_logcontrast_nuisance(out.mu_x, out.sigma_x, out.sigma_u_sq, in.reference_index);
  out.mu_ztilde = nu.mu_ztilde;
  out.sigma_ztilde = nu.sigma_ztilde;
  return out;
}

json bundle_to_json(const NuisanceBundle& b) {
  json doc;
  doc["schema_version"] = 1;
  doc["version"] = kArtifactVersion;
  doc["sigma_u_sq"] = b.sigma_u_sq;
  doc["mu_x"] = vector_to_json(b.mu_x);
  doc["sigma_x"] = matrix_to_json(b.sigma_x);
  doc["cov_estimator"] = b.cov_method;
  doc["psd_repaired"] = b.psd_repaired;
  doc["reference_index"] = b.reference_index;
  doc["reference"] = b.reference_name;
  doc["component_names"] = b.component_names;
  doc["mu_ztilde"] = vector_to_json(b.mu_ztilde);
  doc["sigma_ztilde"] = matrix_to_json(b.sigma_ztilde);
  return doc;
}

NuisanceBundle load_bundle(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
  auto need = [&](const char* key) -> const json& {
    if (!doc.contains(key))
      throw InvalidInput(path + ": missing nuisance field '" + key + "'");
    return doc[key];
  };
  if (need("schema_version").get<int>() != 1)
    throw InvalidInput(path + ": unsupported schema_version");
  NuisanceBundle b;
  b.sigma_u_sq = need("sigma_u_sq").get<double>();
  b.mu_x = vector_from_json(need("mu_x"), "mu_x");
  b.sigma_x = matrix_from_json(need("sigma_x"), "sigma_x");
  b.cov_method = need("cov_estimator").get<std::string>();
  b.psd_repaired = need("psd_repaired").get<bool>();
  b.reference_index = need("reference_index").get<int>();
  b.reference_name = need("reference").get<std::string>();
  for (const auto& name : need("component_names"))
    b.component_names.push_back(name.get<std::string>());
  b.mu_ztilde = vector_from_json(need("mu_ztilde"), "mu_ztilde");
  b.sigma_ztilde = matrix_from_json(need("sigma_ztilde"), "sigma_ztilde");
  if (b.sigma_ztilde.rows() != b.sigma_ztilde.cols() ||
      b.sigma_ztilde.rows() != b.mu_ztilde.size())
    throw InvalidInput(path + ": mu_ztilde/sigma_ztilde dimensions disagree");
  return b;
}

struct MethodResults {
  std::string method;
  DebiasedEstimate estimate;
  std::vector<CoefficientInference> inference;
};

// Rows in deterministic order: method blocks, components sorted by name.
std::vector<std::size_t> name_sorted_order(const std::vector<std::string>& names) {
  std::vector<std::size_t> order(names.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });
  return order;
}

}  // namespace

int cmd_analyze(const AnalysisOptions& opt) {
  const LoadedInputs in = load_inputs(opt);

  NuisanceBundle bundle;
  if (!opt.nuisance_file.empty()) {
    bundle = load_bundle(opt.nuisance_file);
    if (static_cast<Eigen::Index>(bundle.mu_ztilde.size()) + 1 !=
        static_cast<Eigen::Index>(in.names.size()))
      throw InvalidInput(opt.nuisance_file + ": bundle dimension does not match the counts file");
    if (!opt.reference.empty() && bundle.reference_index != in.reference_index)
      throw InvalidInput(opt.nuisance_file + ": bundle reference '" + bundle.reference_name +
                         "' conflicts with --reference");
  } else {
    bundle = estimate_bundle(in, opt);
  }

  const LogContrastNuisance nuisance =
      nuisance_shared_reference(bundle.mu_ztilde, bundle.sigma_ztilde, bundle.sigma_u_sq);

  const MatrixXd v = log_contrast(close(in.counts), bundle.reference_index).values;
  const CvConfig cv{opt.cv_folds, {}, opt.seed};

  std::vector<MethodResults> results;
  {
    MethodResults r;
    r.method = "proposed";
    r.estimate = fit_proposed(v, in.response, nuisance, cv);
    r.inference = coefficient_inference(r.estimate, opt.level);
    results.push_back(std::move(r));
  }
  {
    MethodResults r;
    r.method = "debiased_lasso";
    r.estimate = fit_debiased_lasso(v, in.response, cv);
    r.inference = coefficient_inference(r.estimate, opt.level);
    results.push_back(std::move(r));
  }

  fs::create_directories(opt.out_path);
  std::vector<std::string> contrast_names = in.contrast_names;
  if (bundle.reference_index != in.reference_index) {
    // bundle may have been built for a different reference; honor the bundle
    contrast_names.clear();
    for (std::size_t j = 0; j < in.names.size(); ++j)
      if (static_cast<int>(j) + 1 != bundle.reference_index)
        contrast_names.push_back(in.names[j]);
  }
  const std::vector<std::size_t> order = name_sorted_order(contrast_names);

  // results.csv: one row per coefficient x method, sorted by component name
  {
    std::ostringstream out;
    out << "method,component,estimate,se,p_value,ci_low,ci_high,significant\n";
    for (const MethodResults& r : results)
      for (std::size_t idx : order) {
        const CoefficientInference& ci = r.inference[idx];
        out << r.method << ',' << contrast_names[idx] << ',' << format_double(ci.estimate)
            << ',' << format_double(ci.se) << ',' << format_double(ci.p_value) << ','
            << format_double(ci.ci_low) << ',' << format_double(ci.ci_high) << ','
            << (ci.p_value < 0.05 ? "true" : "false") << "\n";
      }
    write_file((fs::path(opt.out_path) / "results.csv").string(), out.str());
  }

  // results.json: same rows plus run metadata
  {
    json doc;
    doc["schema_version"] = 1;
    doc["version"] = kArtifactVersion;
    json cfg;
    cfg["counts"] = opt.counts_path;
    cfg["replicates"] = opt.replicate_paths;
    cfg["response"] = opt.response_path;
    cfg["reference"] = bundle.reference_name;
    cfg["cov_estimator"] = bundle.cov_method;
    cfg["zero_impute"] = opt.zero_impute;
    cfg["level"] = opt.level;
    cfg["cv_folds"] = opt.cv_folds;
    cfg["seed"] = opt.seed;
    if (!opt.nuisance_file.empty()) cfg["nuisance_file"] = opt.nuisance_file;
    doc["config"] = cfg;
    doc["n"] = static_cast<long long>(in.counts.rows());
    doc["p"] = static_cast<long long>(in.counts.cols());
    doc["sigma_u_sq"] = bundle.sigma_u_sq;
    json methods;
    for (const MethodResults& r : results) {
      json m;
      m["sigma_hat"] = r.estimate.sigma_hat;
      m["lambda"] = r.estimate.lambda;
      methods[r.method] = m;
    }
    doc["methods"] = methods;
    json rows = json::array();
    for (const MethodResults& r : results)
      for (std::size_t idx : order) {
        const CoefficientInference& ci = r.inference[idx];
        json row;
        row["method"] = r.method;
        row["component"] = contrast_names[idx];
        row["estimate"] = ci.estimate;
        row["se"] = ci.se;
        row["p_value"] = ci.p_value;
        row["ci_low"] = ci.ci_low;
        row["ci_high"] = ci.ci_high;
        row["significant"] = ci.p_value < 0.05;
        rows.push_back(std::move(row));
      }
    doc["results"] = rows;
    write_json_file((fs::path(opt.out_path) / "results.json").string(), doc);
  }

  // short console echo: significant components per method
  for (const MethodResults& r : results) {
    int hits = 0;
    for (const CoefficientInference& ci : r.inference)
      if (ci.p_value < 0.05) ++hits;
    std::printf("%-15s sigma_hat=%.4f lambda=%.6f significant=%d/%d\n", r.method.c_str(),
                r.estimate.sigma_hat, r.estimate.lambda, hits,
                static_cast<int>(r.inference.size()));
  }
  return 0;
}

int cmd_estimate_nuisance(const AnalysisOptions& opt) {
  const LoadedInputs in = load_inputs(opt);
  const NuisanceBundle bundle = estimate_bundle(in, opt);
  write_json_file(opt.out_path, bundle_to_json(bundle));
  std::printf("sigma_u_sq=%.6f reference=%s cov=%s -> %s\n", bundle.sigma_u_sq,
              bundle.reference_name.c_str(), bundle.cov_method.c_str(), opt.out_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// make-data

int cmd_make_data(const MakeDataOptions& opt) {
  if (opt.n < 2 || opt.p < 2) throw InvalidInput("make-data: need n >= 2 and p >= 2");
  if (opt.replicates < 2) throw InvalidInput("make-data: need at least 2 replicates");

  SimulationScenario sc;
  sc.n = opt.n;
  sc.p = opt.p;
  sc.rho = opt.rho;
  sc.sigma_u_sq = opt.sigma_u_sq;
  sc.sigma_eps = opt.sigma_eps;
  sc.n_replicate_obs = opt.replicates - 1;
  sc.seed = opt.seed;
  const SimulatedDataset data = generate_dataset(sc, 0);

  // zero-padded names keep lexicographic order equal to column order
  std::size_t width = std::to_string(opt.p).size();
  std::vector<std::string> names;
  for (int j = 1; j <= opt.p; ++j) {
    std::string num = std::to_string(j);
    names.emplace_back("comp" + std::string(width - num.size(), '0') + num);
  }

  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);
  write_csv_matrix((dir / "counts.csv").string(), names, data.replicates[0].values);
  std::vector<std::string> rep_files;
  for (std::size_t r = 0; r < data.replicates.size(); ++r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "rep%zu.csv", r + 1);
    write_csv_matrix((dir / buf).string(), names, data.replicates[r].values);
    rep_files.emplace_back(buf);
  }
  write_csv_column((dir / "response.csv").string(), "y", data.y.values);

  json truth;
  truth["schema_version"] = 1;
  truth["alpha"] = vector_to_json(sc.effective_alpha());
  truth["n"] = opt.n;
  truth["p"] = opt.p;
  truth["replicates"] = opt.replicates;
  truth["rho"] = opt.rho;
  truth["sigma_u_sq"] = opt.sigma_u_sq;
  truth["sigma_eps"] = opt.sigma_eps;
  truth["seed"] = opt.seed;
  truth["reference"] = names.back();
  write_json_file((dir / "truth.json").string(), truth);

  std::printf("wrote counts.csv, %zu replicate files, response.csv, truth.json to %s\n",
              rep_files.size(), opt.out_dir.c_str());
  return 0;
}

}  // namespace calib::cli
