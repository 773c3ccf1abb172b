#pragma once

// Worker grouping: timing model, round-count bound, the plan objective
//   L(x) = Lbar * (1 + tau_hat) * log_B(A)
// and the groupers (greedy, exhaustive, latency tiers, trivial plans).

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <json.hpp>

#include "airfedga/powerctl.hpp"
#include "airfedga/profile.hpp"

namespace airfedga {

using Groups = std::vector<std::vector<std::size_t>>;

struct TimingConfig {
  std::size_t model_dim = 1;       // q
  std::size_t subchannels = 1;     // R
  double symbol_duration = 1.0;    // L^s, seconds
  double xi = 0.3;
};

double upload_time(const TimingConfig& cfg);
double group_completion(std::span<const std::size_t> group, std::span<const double> latencies,
                        double upload);
double mean_round_time(std::span<const double> completion);
double staleness_estimate(std::span<const double> completion);
std::vector<double> plan_psi(std::span<const double> completion);

struct ConvergenceInputs {
  double mu = 0.0;
  double L = 1.0;
  double gamma = 0.75;
  double G = 1.0;
  double epsilon = 1.0;
  double initial_gap = 1.0;  // F(w0) - F(w*)
  // Nominal model-norm bound and channel used for the pre-run C_max solve.
  double model_norm = 1.0;
  double noise_variance = 1.0;
  PowerCtlConfig power;
};

struct RoundBound {
  double A = 0.0;
  double B = 0.0;
  double delta = 0.0;
  double T = 0.0;
};

// Throws ConfigError when B falls outside (0, 1). T is +inf when
// delta >= epsilon and 0 when A >= 1.
RoundBound round_bound(std::span<const double> psi, std::span<const double> beta,
                       std::span<const double> emd, const ConvergenceInputs& conv, double c_max,
                       double tau_max);

struct GroupStats {
  std::vector<std::size_t> members;
  double data_size = 0.0;          // D_j
  double beta = 0.0;               // D_j / D
  std::vector<double> class_props; // beta_j^k
  double emd = 0.0;                // Lambda_j
  double completion = 0.0;         // L_j
  double psi = 0.0;
  double nominal_cost = 0.0;       // C_j from the unit-gain power solve
};

struct GroupPlan {
  std::vector<GroupStats> groups;
  double mean_round_time = 0.0;
  double staleness = 0.0;  // tau_hat
  double c_max = 0.0;
  RoundBound bound;
  double objective = std::numeric_limits<double>::infinity();

  std::size_t num_groups() const { return groups.size(); }
  Groups membership() const;
  double average_emd() const;
};

// Every latency spread within a group is at most xi * (max_i l_i - min_i l_i),
// with the spread taken over all workers.
bool is_feasible(const Groups& groups, std::span<const WorkerProfile> profiles, double xi);
bool is_partition(const Groups& groups, std::size_t num_workers);

// Full recomputation of every derived quantity. The plan may cover only part
// of the workers; shares are always relative to the full data set.
GroupPlan evaluate_plan(const Groups& groups, std::span<const WorkerProfile> profiles,
                        const TimingConfig& timing, const ConvergenceInputs& conv);

GroupPlan greedy_group(std::span<const WorkerProfile> profiles, const TimingConfig& timing,
                       const ConvergenceInputs& conv);
// Enumerates all set partitions; intended for N <= 10.
GroupPlan exhaustive_group(std::span<const WorkerProfile> profiles, const TimingConfig& timing,
                           const ConvergenceInputs& conv);
// Equal-width latency bands, split further where a band is wider than the
// slack allows.
GroupPlan tifl_group(std::span<const WorkerProfile> profiles, const TimingConfig& timing,
                     const ConvergenceInputs& conv, std::size_t bands = 5);
GroupPlan single_group(std::span<const WorkerProfile> profiles, const TimingConfig& timing,
                       const ConvergenceInputs& conv);
GroupPlan singleton_groups(std::span<const WorkerProfile> profiles, const TimingConfig& timing,
                           const ConvergenceInputs& conv);

void to_json(nlohmann::json& j, const GroupPlan& plan);

}  // namespace airfedga
