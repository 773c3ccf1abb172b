#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "airfedga/datagen.hpp"
#include "airfedga/learner.hpp"

namespace airfedga {

struct RoundLog;
struct GroupPlan;

struct ConvergenceParams {
  double mu = 0.0;
  double L = 1.0;
  double gamma = 0.75;
  double G = 0.0;
  double tau_max = 0.0;
  std::vector<double> psi;
  std::vector<double> beta;
  std::vector<double> emd;
  double c_max = 0.0;
};

ConvergenceParams params_from_plan(const GroupPlan& plan, double mu, double L, double gamma,
                                   double G, double tau_max, double c_max);

// [1 - (2 mu gamma - mu / L) * sum(psi beta)]^(1 / (1 + tau_max)); 1 when mu = 0.
double rho(const ConvergenceParams& p);
double delta(const ConvergenceParams& p);

// rho^t * initial_gap + delta
double envelope(double rho_value, double initial_gap, double delta_value, double t);

struct RecursionReport {
  std::size_t sequences = 0;
  std::size_t checks = 0;
  std::size_t violations = 0;
  double worst_slack = 0.0;  // min over checks of bound - Q(t), relative to the bound
};

// Runs `trials` sequences that satisfy Q(t) = x Q(t-1) + y Q(l_t) + z with
// equality, each delay l_t drawn from [max(0, t-1-tau_max), t-1], and checks
// Q(t) <= rho^t Q(0) + delta at every step.
RecursionReport recursion_check(double x, double y, double z, std::size_t tau_max, std::size_t trials,
                          std::size_t steps, std::uint64_t seed);

// Random admissible (x, y, z, tau_max) draws, one saturated sequence each.
RecursionReport recursion_monte_carlo(std::size_t draws, std::size_t max_tau, std::size_t steps,
                                std::uint64_t seed);

// F(w_t) - F* for t = 0 (initial model) and after every logged round.
std::vector<double> empirical_gap_curve(std::span<const RoundLog> logs, double initial_loss,
                                        double optimum_loss);

// Fraction of rounds t > burn_in whose gap lies under the envelope.
double envelope_coverage(std::span<const double> gaps, double rho_value, double delta_value,
                         std::size_t burn_in);

// Largest local-gradient norm over random probe models w ~ N(0, scale^2 I).
double estimate_gradient_bound(std::span<const Dataset> shards, double l2, std::size_t probes,
                               double scale, std::uint64_t seed);

void to_json(nlohmann::json& j, const ConvergenceParams& p);
void to_json(nlohmann::json& j, const RecursionReport& r);

}  // namespace airfedga
