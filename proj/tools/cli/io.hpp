#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "calib/montecarlo.hpp"
#include "calib/types.hpp"

namespace calib::cli {

// CSV with a header row of component names and one numeric row per subject.
struct NamedMatrix {
  std::vector<std::string> names;
  MatrixXd values;
};

NamedMatrix read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const std::vector<std::string>& names,
                      const MatrixXd& values);

// Single-column CSV with a header.
VectorXd read_csv_column(const std::string& path, std::string* header = nullptr);
void write_csv_column(const std::string& path, const std::string& header,
                      const VectorXd& values);

// Shortest representation that round-trips a double.
std::string format_double(double v);

// Flat TOML subset: `key = value` lines with numbers, booleans, quoted
// strings, and numeric arrays; comments with '#'. Section headers are
// rejected (the documented schema is flat).
using TomlValue = std::variant<double, bool, std::string, std::vector<double>>;
std::map<std::string, TomlValue> parse_flat_toml(const std::string& text);

// Scenario config from TOML (or JSON, detected by extension/content).
// Unknown or ill-typed fields raise InvalidInput naming the field.
struct ScenarioConfig {
  SimulationScenario scenario;
  std::vector<double> alpha_prefix;  // as given; empty = default
};
ScenarioConfig load_scenario_config(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace calib::cli
