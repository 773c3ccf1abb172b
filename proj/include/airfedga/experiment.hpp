#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "airfedga/config.hpp"
#include "airfedga/grouping.hpp"
#include "airfedga/metrics.hpp"
#include "airfedga/sim.hpp"

namespace airfedga {

// Everything a run needs that does not depend on the mechanism. All random
// inputs come from named substreams of cfg.seed: "data" (samples and hold-out
// set), "partition" (size jitter), "latency" (kappa), "channel" (gains and
// noise), "probe" (gradient-bound probes).
struct Prepared {
  ExperimentConfig cfg;
  Environment env;
  TimingConfig timing;
  ConvergenceInputs conv;
  double upload = 0.0;
  double smoothness = 0.0;
  GroupPlan plan;       // used by airfedga, built with grouping.method
  GroupPlan tifl_plan;  // used by tifl

  SimConfig sim_config() const;
};

Prepared prepare(const ExperimentConfig& cfg);

struct MechanismRun {
  Mechanism mechanism = Mechanism::AirFedGA;
  std::vector<RoundLog> logs;
  RunSummary summary;
};

MechanismRun run_mechanism(const Prepared& prep, Mechanism m);
std::vector<MechanismRun> run_all(const Prepared& prep);

nlohmann::json manifest(const Prepared& prep, const std::vector<MechanismRun>& runs);

std::filesystem::path run_directory(const std::filesystem::path& base, const ExperimentConfig& cfg);

// Writes manifest.json, summary.json and one <mechanism>.csv per mechanism.
void write_outputs(const std::filesystem::path& dir, const Prepared& prep,
                   const std::vector<MechanismRun>& runs);

struct RunResult {
  std::filesystem::path directory;
  std::vector<MechanismRun> runs;
};

RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& base);

// One run per value of `axis` (a config key), each in its own directory under
// base/sweep-<axis>-<hash>, plus comparison.csv with one row per mechanism run.
std::filesystem::path run_sweep(const ExperimentConfig& cfg, const std::string& axis,
                                const std::vector<std::string>& values,
                                const std::filesystem::path& base, std::size_t jobs);

}  // namespace airfedga
