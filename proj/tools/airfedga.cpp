#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "airfedga/config.hpp"
#include "airfedga/error.hpp"
#include "airfedga/experiment.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

void apply_overrides(airfedga::ExperimentConfig& cfg, const std::string& seed,
                     const std::string& mechanism, const std::vector<std::string>& sets) {
  if (!seed.empty()) {
    airfedga::set_config_value(cfg, "run.seed", seed);
  }
  if (!mechanism.empty()) {
    airfedga::set_config_value(cfg, "run.mechanism", mechanism);
  }
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw airfedga::ConfigError("override '" + s + "' is not of the form key=value");
    }
    airfedga::set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  airfedga::validate(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grouped asynchronous federated learning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "runs";
  std::string seed;
  std::string mechanism;
  std::size_t jobs = 1;
  std::vector<std::string> sets;

  auto* run = app.add_subcommand("run", "Run one configuration");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("-o,--out", out_dir, "Output base directory");
  run->add_option("--seed", seed, "Override run.seed");
  run->add_option("-m,--mechanism", mechanism, "Override run.mechanism (name, list or all)");
  run->add_option("--set", sets, "Override any key: section.key=value");

  std::string axis;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "Run one configuration per axis value");
  sweep->add_option("config", config_path, "Config file")->required();
  sweep->add_option("--axis", axis, "Config key to vary, e.g. timing.xi")->required();
  sweep->add_option("--values", values, "Values for the axis")->required()->delimiter(',');
  sweep->add_option("-o,--out", out_dir, "Output base directory");
  sweep->add_option("--seed", seed, "Override run.seed");
  sweep->add_option("-m,--mechanism", mechanism, "Override run.mechanism");
  sweep->add_option("-j,--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);
  sweep->add_option("--set", sets, "Override any key: section.key=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    auto cfg = airfedga::load_config(config_path);
    apply_overrides(cfg, seed, mechanism, sets);
    if (run->parsed()) {
      const auto result = airfedga::run_experiment(cfg, out_dir);
      std::cout << result.directory.string() << "\n";
      for (const auto& r : result.runs) {
        std::cout << r.summary.mechanism << ": " << r.summary.rounds << " rounds, final accuracy "
                  << r.summary.final_accuracy << "\n";
      }
    } else {
      std::cout << airfedga::run_sweep(cfg, axis, values, out_dir, jobs).string() << "\n";
    }
  } catch (const airfedga::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
