#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "airfedga/sim.hpp"

namespace airfedga {

// Accuracy counts as reached at the first round whose accuracy is at least
// the threshold and after which it never falls more than this far below it.
inline constexpr double kStabilityMargin = 0.02;

std::optional<std::size_t> stable_crossing(std::span<const RoundLog> logs, double threshold);
std::optional<double> time_to_accuracy(std::span<const RoundLog> logs, double threshold);
std::optional<double> energy_to_accuracy(std::span<const RoundLog> logs, double threshold);

// Population standard deviation of successive loss differences.
double jitter(std::span<const RoundLog> logs);
double jitter(std::span<const double> losses);

double mean_round_time(std::span<const RoundLog> logs);

struct ThresholdResult {
  double threshold = 0.0;
  std::optional<double> time;
  std::optional<double> energy;
  bool operator==(const ThresholdResult&) const = default;
};

struct RunSummary {
  std::string mechanism;
  std::vector<ThresholdResult> thresholds;
  double jitter = 0.0;
  std::size_t rounds = 0;
  double mean_round_time = 0.0;
  double final_loss = 0.0;
  double final_accuracy = 0.0;
  double best_accuracy = 0.0;
  double total_energy = 0.0;
  bool operator==(const RunSummary&) const = default;
};

RunSummary summarize(std::string mechanism, std::span<const RoundLog> logs,
                     std::span<const double> thresholds);

void to_json(nlohmann::json& j, const ThresholdResult& r);
void to_json(nlohmann::json& j, const RunSummary& s);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

std::string csv_escape(std::string_view field);
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

void write_round_csv(std::ostream& out, std::span<const RoundLog> logs);
std::vector<RoundLog> read_round_csv(std::istream& in);

struct ComparisonRow {
  std::string run;
  std::string axis;
  std::string value;
  std::uint64_t seed = 0;
  RunSummary summary;
};

// One row per run; one time and one energy column per threshold of the first row.
void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows);

}  // namespace airfedga
