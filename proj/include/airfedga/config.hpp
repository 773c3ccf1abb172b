#pragma once

// Run configuration: an INI file of `[section]` blocks holding `key = value`
// lines. Keys are addressed as "section.key". run.seed and run.mechanism are
// required; every other key has a default that is echoed into the manifest.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "airfedga/sim.hpp"

namespace airfedga {

enum class GroupingMethod { Greedy, TiFL, Single, Singleton };

std::string_view grouping_name(GroupingMethod g);

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::vector<Mechanism> mechanisms;
  double horizon = 600.0;
  std::size_t max_rounds = 0;

  std::size_t workers = 100;
  std::size_t classes = 10;
  std::size_t features = 20;
  std::size_t samples_per_worker = 100;
  std::size_t test_samples = 2000;
  double separation = 2.0;
  double feature_spread = 20.0;
  std::size_t classes_per_worker = 1;
  bool size_jitter = true;

  double base_latency = 1.0;
  double kappa_min = 1.0;
  double kappa_max = 10.0;
  std::size_t subchannels = 21;
  double symbol_duration = 0.1;
  double xi = 0.3;

  double noise_variance = 1.0;
  double energy_budget = 10.0;

  std::optional<double> learning_rate;  // unset: 0.75 / L
  double l2 = 0.0;

  double theta = 1e-3;
  std::size_t max_iterations = 100;

  GroupingMethod grouping = GroupingMethod::Greedy;
  std::size_t tifl_bands = 5;
  std::optional<double> grouping_mu;      // unset: l2, or 0.1 * L when l2 = 0
  std::optional<double> epsilon;          // unset: initial gap
  std::optional<double> initial_gap;      // unset: ln K - 0.05
  std::optional<double> gradient_bound = 0.3;  // unset (auto): probe estimate
  double model_norm = 1.0;

  double fraction = 0.5;

  std::vector<double> thresholds = {0.5, 0.6, 0.7, 0.8};

  std::size_t model_dim() const { return classes * (features + 1); }
};

struct ConfigKey {
  std::string name;
  bool required = false;
};

const std::vector<ConfigKey>& config_keys();

// Throws ConfigError naming the key for unknown keys and bad values.
void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const ExperimentConfig& cfg, std::string_view key);

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Resolved key/value pairs in table order.
std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& cfg);

// 16 hex digits over every key except run.seed.
std::string config_hash(const ExperimentConfig& cfg);

void validate(const ExperimentConfig& cfg);

}  // namespace airfedga
