#pragma once

// Alternating minimisation of the aggregation-error cost
//   C = (sigma / sqrt(eta) - 1)^2 W^2 + noise / (D^2 eta)
// over the transmit scaling sigma and the receive denoising factor eta,
// subject to per-worker energy budgets.

#include <cstddef>
#include <span>
#include <vector>

namespace airfedga {

struct PowerCtlConfig {
  double theta = 1e-3;
  std::size_t max_iterations = 100;
  // 0 selects the smallest energy cap, which is always feasible.
  double initial_sigma = 0.0;
};

double c_cost(double sigma, double eta, double model_norm, double group_size, double noise_variance);

double optimal_eta(double sigma, double model_norm, double group_size, double noise_variance);

// Per-worker upper bounds h * sqrt(E) / (d * W) on sigma.
std::vector<double> energy_caps(double model_norm, std::span<const double> gains,
                                std::span<const double> sizes, std::span<const double> budgets);

double optimal_sigma(double eta, double model_norm, std::span<const double> gains,
                     std::span<const double> sizes, std::span<const double> budgets);

struct PowerSolution {
  double sigma = 0.0;
  double eta = 0.0;
  double cost = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  // Cost after every half-step (eta update, then sigma update).
  std::vector<double> cost_trace;
};

PowerSolution solve_power(const PowerCtlConfig& cfg, double model_norm,
                          std::span<const double> gains, std::span<const double> sizes,
                          std::span<const double> budgets, double group_size,
                          double noise_variance);

}  // namespace airfedga
