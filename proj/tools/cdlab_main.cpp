#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

#include "cdlab/experiments.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailure = 1;
constexpr int kConfigError = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiment runner for convection-diffusion inverse problems"};
  std::string config_path, scenario, out_dir = "cdlab_out";
  int threads = 1;
  long long seed = -1;
  bool list = false, validate_only = false, dump_default = false;
  app.add_option("--config", config_path, "JSON config (defaults to the built-in configuration)");
  app.add_option("--scenario", scenario, "scenario name or 'all' (overrides the config)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "scenarios run concurrently")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "seed (overrides the config)")->check(CLI::NonNegativeNumber);
  app.add_flag("--list", list, "list scenarios and exit");
  app.add_flag("--validate-only", validate_only, "validate the config and exit without computing");
  app.add_flag("--print-default-config", dump_default, "print the built-in configuration and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  if (list) {
    for (const auto& s : cdlab::scenario_catalog()) std::cout << std::left << std::setw(18) << s.name << s.description << "\n";
    return kPass;
  }
  if (dump_default) {
    std::cout << cdlab::default_config().dump(2) << "\n";
    return kPass;
  }

  try {
    nlohmann::json doc = config_path.empty() ? cdlab::default_config() : cdlab::load_config(config_path);
    if (!scenario.empty() && doc.is_object()) doc["scenario"] = scenario;
    if (seed >= 0 && doc.is_object()) doc["seed"] = static_cast<std::uint64_t>(seed);

    const auto diagnostics = cdlab::validate(doc);
    if (!diagnostics.empty()) {
      for (const auto& d : diagnostics) std::cerr << "config: " << d << "\n";
      return kConfigError;
    }
    if (validate_only) {
      std::cout << "config valid\n";
      return kPass;
    }

    std::vector<std::string> names;
    if (doc["scenario"].is_string()) names.push_back(doc["scenario"].get<std::string>());
    else names = doc["scenario"].get<std::vector<std::string>>();

    const auto reports = cdlab::run_scenarios(doc, names, out_dir, threads);
    bool all = true;
    for (const auto& r : reports) {
      for (const auto& c : r.checks) {
        std::cout << (c.passed ? "PASS" : "FAIL") << "  " << r.scenario << ": " << c.name << "  value " << c.value << " "
                  << c.relation << " " << c.limit;
        if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
        std::cout << "\n";
      }
      all = all && r.passed();
    }
    std::cout << "report written to " << out_dir << "/report.json\n";
    return all ? kPass : kCheckFailure;
  } catch (const cdlab::ConfigError& e) {
    for (const auto& d : e.diagnostics()) std::cerr << "config: " << d << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailure;
  }
}
