#include "io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace calib::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_number(const std::string& tok, const std::string& where) {
  if (tok.empty()) return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size())
    throw InvalidInput(where + ": cannot parse number '" + tok + "'");
  return v;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write file: " + path);
  out << text;
}

NamedMatrix read_csv_matrix(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  NamedMatrix out;
  out.names = split(line, ',');

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto toks = split(line, ',');
    if (toks.size() != out.names.size())
      throw InvalidInput(path + ": line " + std::to_string(lineno) + " has " +
                         std::to_string(toks.size()) + " fields, expected " +
                         std::to_string(out.names.size()));
    std::vector<double> row(toks.size());
    for (std::size_t j = 0; j < toks.size(); ++j)
      row[j] = parse_number(toks[j], path + ": line " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput(path + ": no data rows");
  out.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(out.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // prefer the shortest form that still round-trips
  for (int prec = 1; prec < 17; ++prec) {
    char cand[40];
    std::snprintf(cand, sizeof(cand), "%.*g", prec, v);
    if (std::strtod(cand, nullptr) == v) return cand;
  }
  return buf;
}

void write_csv_matrix(const std::string& path, const std::vector<std::string>& names,
                      const MatrixXd& values) {
  std::ostringstream out;
  for (std::size_t j = 0; j < names.size(); ++j)
    out << (j ? "," : "") << names[j];
  out << "\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j)
      out << (j ? "," : "") << format_double(values(i, j));
    out << "\n";
  }
  write_file(path, out.str());
}

VectorXd read_csv_column(const std::string& path, std::string* header) {
  NamedMatrix m = read_csv_matrix(path);
  if (m.names.size() != 1)
    throw InvalidInput(path + ": expected a single column, found " +
                       std::to_string(m.names.size()));
  if (header) *header = m.names[0];
  return m.values.col(0);
}

void write_csv_column(const std::string& path, const std::string& header,
                      const VectorXd& values) {
  std::ostringstream out;
  out << header << "\n";
  for (Eigen::Index i = 0; i < values.size(); ++i) out << format_double(values(i)) << "\n";
  write_file(path, out.str());
}

namespace {

std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

TomlValue parse_toml_value(const std::string& raw, const std::string& key) {
  const std::string v = trim(raw);
  if (v.empty()) throw InvalidInput("config field '" + key + "': empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw InvalidInput("config field '" + key + "': unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '[') {
    if (v.back() != ']') throw InvalidInput("config field '" + key + "': unterminated array");
    std::vector<double> arr;
    const std::string body = trim(v.substr(1, v.size() - 2));
    if (!body.empty())
      for (const std::string& tok : split(body, ','))
        arr.push_back(parse_number(tok, "config field '" + key + "'"));
    return arr;
  }
  return parse_number(v, "config field '" + key + "'");
}

}  // namespace

namespace {

// JSON configs carry the same flat key/value schema as the TOML form.
std::map<std::string, TomlValue> parse_flat_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidInput("config: top level must be an object");
  std::map<std::string, TomlValue> out;
  for (const auto& [key, value] : doc.items()) {
    if (value.is_number()) {
      out[key] = value.get<double>();
    } else if (value.is_boolean()) {
      out[key] = value.get<bool>();
    } else if (value.is_string()) {
      out[key] = value.get<std::string>();
    } else if (value.is_array()) {
      std::vector<double> arr;
      for (const auto& item : value) {
        if (!item.is_number())
          throw InvalidInput("config field '" + key + "': expected an array of numbers");
        arr.push_back(item.get<double>());
      }
      out[key] = std::move(arr);
    } else {
      throw InvalidInput("config field '" + key + "': unsupported value type");
    }
  }
  return out;
}

}  // namespace

std::map<std::string, TomlValue> parse_flat_toml(const std::string& text) {
  std::map<std::string, TomlValue> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(strip_comment(line));
    if (stripped.empty()) continue;
    if (stripped.front() == '[')
      throw InvalidInput("config line " + std::to_string(lineno) +
                         ": section headers are not part of the flat schema");
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    if (key.empty())
      throw InvalidInput("config line " + std::to_string(lineno) + ": empty key");
    out[key] = parse_toml_value(stripped.substr(eq + 1), key);
  }
  return out;
}

namespace {

double require_number(const TomlValue& v, const std::string& key) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  throw InvalidInput("config field '" + key + "': expected a number");
}

std::string require_string(const TomlValue& v, const std::string& key) {
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  throw InvalidInput("config field '" + key + "': expected a string");
}

int require_int(const TomlValue& v, const std::string& key) {
  const double d = require_number(v, key);
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d)
    throw InvalidInput("config field '" + key + "': expected an integer");
  return i;
}

}  // namespace

ScenarioConfig load_scenario_config(const std::string& path) {
  const std::string text = read_file(path);
  const bool looks_json =
      path.size() > 5 && path.substr(path.size() - 5) == ".json";
  const std::string head = trim(text);
  const std::map<std::string, TomlValue> kv =
      (looks_json || (!head.empty() && head.front() == '{'))
          ? parse_flat_json(text)
          : parse_flat_toml(text);

  ScenarioConfig out;
  SimulationScenario& sc = out.scenario;
  for (const auto& [key, value] : kv) {
    if (key == "schema_version") {
      if (require_int(value, key) != 1)
        throw InvalidInput("config field 'schema_version': only version 1 is supported");
    } else if (key == "n") {
      sc.n = require_int(value, key);
    } else if (key == "p") {
      sc.p = require_int(value, key);
    } else if (key == "rho") {
      sc.rho = require_number(value, key);
    } else if (key == "sigma_u_sq") {
      sc.sigma_u_sq = require_number(value, key);
    } else if (key == "sigma_eps") {
      sc.sigma_eps = require_number(value, key);
    } else if (key == "alpha") {
      if (const auto* arr = std::get_if<std::vector<double>>(&value))
        out.alpha_prefix = *arr;
      else
        throw InvalidInput("config field 'alpha': expected an array of numbers");
    } else if (key == "n_replicate_obs") {
      sc.n_replicate_obs = require_int(value, key);
    } else if (key == "nuisance_mode") {
      const std::string s = require_string(value, key);
      if (s == "oracle") sc.nuisance_mode = SimulationScenario::NuisanceMode::oracle;
      else if (s == "estimated") sc.nuisance_mode = SimulationScenario::NuisanceMode::estimated;
      else throw InvalidInput("config field 'nuisance_mode': expected oracle|estimated");
    } else if (key == "cov_estimator") {
      const std::string s = require_string(value, key);
      if (s == "nodewise") sc.cov_estimator = CovarianceEstimate::Method::nodewise;
      else if (s == "shrinkage") sc.cov_estimator = CovarianceEstimate::Method::shrinkage;
      else throw InvalidInput("config field 'cov_estimator': expected nodewise|shrinkage");
    } else if (key == "n_mc") {
      sc.n_mc = require_int(value, key);
    } else if (key == "seed") {
      sc.seed = static_cast<std::uint64_t>(require_number(value, key));
    } else {
      throw InvalidInput("config field '" + key + "' is not part of the schema");
    }
  }
  if (sc.n < 2) throw InvalidInput("config field 'n': must be at least 2");
  if (sc.p < 2) throw InvalidInput("config field 'p': must be at least 2");
  if (!(std::abs(sc.rho) < 1.0)) throw InvalidInput("config field 'rho': must be in (-1,1)");
  if (sc.sigma_u_sq < 0) throw InvalidInput("config field 'sigma_u_sq': must be >= 0");
  if (sc.sigma_eps < 0) throw InvalidInput("config field 'sigma_eps': must be >= 0");
  if (sc.n_replicate_obs < 0) throw InvalidInput("config field 'n_replicate_obs': must be >= 0");
  if (sc.n_mc < 1) throw InvalidInput("config field 'n_mc': must be >= 1");

  if (!out.alpha_prefix.empty()) {
    if (static_cast<int>(out.alpha_prefix.size()) > sc.p - 1)
      throw InvalidInput("config field 'alpha': longer than p-1");
    VectorXd a = VectorXd::Zero(sc.p - 1);
    for (std::size_t j = 0; j < out.alpha_prefix.size(); ++j)
      a(static_cast<Eigen::Index>(j)) = out.alpha_prefix[j];
    sc.alpha_true = a;
  }
  return out;
}

}  // namespace calib::cli
