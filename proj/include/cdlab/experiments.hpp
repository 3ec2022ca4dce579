#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdlab/grid.hpp"
#include "cdlab/tolerances.hpp"

namespace cdlab {

struct ScenarioInfo {
  std::string name;
  std::string description;
};

const std::vector<ScenarioInfo>& scenario_catalog();
bool is_scenario(const std::string& name);

/// Configuration problems found before any numerics run.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

/// Parses JSON text; malformed input raises ConfigError naming line and column.
nlohmann::json parse_config_text(const std::string& text);
nlohmann::json load_config(const std::filesystem::path& path);

/// The configuration shipped in configs/default.json.
nlohmann::json default_config();

/// Diagnostics for a config document, including every per-scenario override.
/// An empty list means the document is runnable. Never runs numerics.
std::vector<std::string> validate(const nlohmann::json& doc);

/// Settings of one scenario after its override block is merged in.
struct ExperimentConfig {
  std::string scenario;
  int dim = 2;
  int nodes = 33;
  int steps = 32;
  double horizon = 1.0;
  std::string convection = "swirl";
  std::string density = "smooth";
  double fraction = 0.8;
  std::string second_convection = "compact";
  std::string second_density = "bump";
  double second_fraction = 0.4;
  Vec omega{1.0, 0.0, 0.0};
  double eps = 0.2;
  int directions = 32;
  std::vector<double> lambdas{8.0, 16.0, 32.0, 64.0};
  ToleranceTable tolerances;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 1;
  std::string config_hash;
  nlohmann::json document;  // the whole source document, for scenarios that run others

  SpaceTimeGrid grid() const { return SpaceTimeGrid(dim, nodes, steps, horizon); }
  double param(const std::string& key, double fallback) const;
};

/// Throws ConfigError when the merged settings do not validate.
ExperimentConfig config_for(const nlohmann::json& doc, const std::string& scenario);

struct Check {
  std::string name;
  int criterion = 0;  // acceptance criterion number, 0 for supporting checks
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
  std::string relation = "<=";
  std::string detail;
};

struct RunReport {
  std::string scenario;
  std::vector<Check> checks;
  nlohmann::json measured = nlohmann::json::object();
  std::vector<std::string> artifacts;
  nlohmann::json timing = nlohmann::json::object();  // left out of the content hash
  double wall_seconds = 0.0;
  std::string config_hash;
  std::string code_version;

  bool passed() const;
  /// Timing is left out when `with_timing` is false so that the result is
  /// reproducible bit for bit.
  nlohmann::json to_json(bool with_timing = true) const;
  /// Hash of to_json(false).
  std::string content_hash() const;
};

/// Runs one scenario and writes its CSV/JSON artifacts into `out_dir`.
RunReport run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Runs the scenarios on up to `threads` workers, each into out/<scenario>,
/// then writes out/report.json. Reports come back in the order requested.
std::vector<RunReport> run_scenarios(const nlohmann::json& doc, const std::vector<std::string>& names,
                                     const std::filesystem::path& out, int threads);

/// Stable 64-bit FNV-1a hash as 16 hex digits.
std::string stable_hash(const std::string& bytes);

}  // namespace cdlab
