#pragma once

// Discrete-event simulation of grouped asynchronous training. Workers start at
// time 0 with the initial model. A group is ready when its slowest member
// finishes local training; ready groups use the shared uplink one at a time
// (earliest ready first, lowest group index on ties). The global model is
// updated when an upload completes and is then sent to that group only, with
// zero download time.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "airfedga/datagen.hpp"
#include "airfedga/grouping.hpp"
#include "airfedga/learner.hpp"
#include "airfedga/powerctl.hpp"
#include "airfedga/profile.hpp"

namespace airfedga {

enum class Mechanism { AirFedGA, FedAvg, AirFedAvg, Dynamic, TiFL };

std::string_view mechanism_name(Mechanism m);
Mechanism parse_mechanism(std::string_view name);

struct RoundLog {
  std::size_t round = 0;
  double time = 0.0;
  int group = 0;
  std::size_t staleness = 0;
  // Power schedule; all three are 0 for orthogonal (OMA) uploads.
  double sigma = 0.0;
  double eta = 0.0;
  double cost = 0.0;
  std::size_t power_iterations = 0;
  std::vector<std::size_t> participants;
  std::vector<double> energies;  // aligned with participants; empty for OMA
  double loss = 0.0;
  double accuracy = 0.0;
  double cumulative_energy = 0.0;

  double event_energy() const;
  bool operator==(const RoundLog&) const = default;
};

struct Environment {
  Dataset train;
  Dataset test;
  Partition partition;
  std::vector<Dataset> shards;
  std::vector<WorkerProfile> profiles;

  ModelShape shape() const { return ModelShape::of(train); }
};

Environment make_environment(Dataset train, Dataset test, Partition partition,
                             std::vector<WorkerProfile> profiles);

using RoundObserver = std::function<void(const RoundLog&, const ModelVector&)>;

struct SimConfig {
  LearnerConfig learner;
  double noise_variance = 1.0;
  PowerCtlConfig power;
  double upload_time = 1.0;   // L^u; one OMA upload also takes this long
  double horizon = 0.0;       // simulated seconds; 0 = unlimited
  std::size_t max_rounds = 0; // 0 = unlimited
  std::uint64_t channel_seed = 0;
  ModelVector initial_model;  // empty = zeros
  RoundObserver observer;
};

// Asynchronous groups with over-the-air uploads and per-event power control.
std::vector<RoundLog> run_airfedga(const Environment& env, const GroupPlan& plan,
                                   const SimConfig& cfg);
// Same engine with sequential per-worker uploads and exact aggregation.
std::vector<RoundLog> run_tifl(const Environment& env, const GroupPlan& plan,
                               const SimConfig& cfg);
// Synchronous, all workers, sequential uploads, exact aggregation.
std::vector<RoundLog> run_fedavg(const Environment& env, const SimConfig& cfg);
// Synchronous, all workers, one over-the-air upload per round.
std::vector<RoundLog> run_air_fedavg(const Environment& env, const SimConfig& cfg);
// Synchronous rounds over the air in which only the ceil(fraction * N)
// earliest finishers are aggregated (normalized by their own data size); the
// others sit the round out. With stationary latencies the selection is the
// same every round.
std::vector<RoundLog> run_dynamic(const Environment& env, double fraction, const SimConfig& cfg);

}  // namespace airfedga
