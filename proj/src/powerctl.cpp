#include "airfedga/powerctl.hpp"

#include <algorithm>
#include <cmath>

#include "airfedga/error.hpp"

namespace airfedga {

double c_cost(double sigma, double eta, double model_norm, double group_size,
              double noise_variance) {
  if (!(eta > 0.0)) {
    throw DomainError("denoising factor must be positive");
  }
  if (!(group_size > 0.0)) {
    throw DomainError("group data size must be positive");
  }
  const double mismatch = sigma / std::sqrt(eta) - 1.0;
  return mismatch * mismatch * model_norm * model_norm +
         noise_variance / (group_size * group_size * eta);
}

double optimal_eta(double sigma, double model_norm, double group_size, double noise_variance) {
  if (!(sigma > 0.0)) {
    throw DomainError("power scaling factor must be positive");
  }
  if (!(model_norm > 0.0) || !(group_size > 0.0)) {
    throw DomainError("model norm bound and group data size must be positive");
  }
  const double w2 = model_norm * model_norm;
  const double root =
      (sigma * sigma * w2 + noise_variance / (group_size * group_size)) / (sigma * w2);
  return root * root;
}

std::vector<double> energy_caps(double model_norm, std::span<const double> gains,
                                std::span<const double> sizes, std::span<const double> budgets) {
  if (gains.empty()) {
    throw ValidationError("power control needs at least one worker");
  }
  if (gains.size() != sizes.size() || gains.size() != budgets.size()) {
    throw ValidationError("gains, sizes and budgets differ in length");
  }
  if (!(model_norm > 0.0)) {
    throw DomainError("model norm bound must be positive");
  }
  std::vector<double> caps(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i) {
    if (!(gains[i] > 0.0) || !(sizes[i] > 0.0) || !(budgets[i] > 0.0)) {
      throw DomainError("gains, sizes and budgets must be positive");
    }
    caps[i] = gains[i] * std::sqrt(budgets[i]) / (sizes[i] * model_norm);
  }
  return caps;
}

double optimal_sigma(double eta, double model_norm, std::span<const double> gains,
                     std::span<const double> sizes, std::span<const double> budgets) {
  if (!(eta > 0.0)) {
    throw DomainError("denoising factor must be positive");
  }
  const auto caps = energy_caps(model_norm, gains, sizes, budgets);
  return std::min(std::sqrt(eta), *std::min_element(caps.begin(), caps.end()));
}

PowerSolution solve_power(const PowerCtlConfig& cfg, double model_norm,
                          std::span<const double> gains, std::span<const double> sizes,
                          std::span<const double> budgets, double group_size,
                          double noise_variance) {
  if (!(cfg.theta > 0.0 && cfg.theta < 1.0)) {
    throw ConfigError("power control threshold must lie in (0, 1)");
  }
  if (cfg.max_iterations < 1) {
    throw ConfigError("power control needs at least one iteration");
  }
  PowerSolution s;
  if (cfg.initial_sigma > 0.0) {
    s.sigma = cfg.initial_sigma;
  } else {
    const auto caps = energy_caps(model_norm, gains, sizes, budgets);
    s.sigma = *std::min_element(caps.begin(), caps.end());
  }
  double prev_eta = 0.0;
  for (s.iterations = 1; s.iterations <= cfg.max_iterations; ++s.iterations) {
    s.eta = optimal_eta(s.sigma, model_norm, group_size, noise_variance);
    s.cost_trace.push_back(c_cost(s.sigma, s.eta, model_norm, group_size, noise_variance));
    const double sigma = optimal_sigma(s.eta, model_norm, gains, sizes, budgets);
    s.cost_trace.push_back(c_cost(sigma, s.eta, model_norm, group_size, noise_variance));
    const bool sigma_settled = std::abs(sigma - s.sigma) <= cfg.theta * sigma;
    const bool eta_settled = prev_eta > 0.0 && std::abs(s.eta - prev_eta) <= cfg.theta * s.eta;
    s.sigma = sigma;
    prev_eta = s.eta;
    if (sigma_settled && eta_settled) {
      s.converged = true;
      break;
    }
  }
  s.iterations = std::min(s.iterations, cfg.max_iterations);
  s.cost = s.cost_trace.back();
  return s;
}

}  // namespace airfedga
