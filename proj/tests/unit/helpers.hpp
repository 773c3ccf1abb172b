#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "airfedga/datagen.hpp"
#include "airfedga/learner.hpp"
#include "airfedga/profile.hpp"
#include "airfedga/sim.hpp"

namespace testing {

inline airfedga::WorkerProfile profile(std::size_t id, double latency, std::vector<double> classes,
                                       double budget = 10.0) {
  airfedga::WorkerProfile p;
  p.id = id;
  p.latency = latency;
  p.kappa = latency;
  p.class_sizes = std::move(classes);
  for (const double c : p.class_sizes) {
    p.data_size += c;
  }
  p.energy_budget = budget;
  return p;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) {
    x = normal(rng);
  }
  return v;
}

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) {
    x = e(rng);
    s += x;
  }
  for (auto& x : v) {
    x /= s;
  }
  return v;
}

// Small one-hot environment: K classes, N workers, explicit latencies.
inline airfedga::Environment small_environment(std::size_t K, std::size_t N,
                                               const std::vector<double>& latencies,
                                               std::size_t per_worker = 20,
                                               std::uint64_t seed = 5) {
  auto train = airfedga::generate_synthetic(seed, K, 4, N * per_worker, 2.0);
  auto test = airfedga::generate_holdout(seed, K, 4, 200, 2.0);
  auto part = airfedga::partition_label_skew(train, N, 1, std::nullopt);
  std::vector<airfedga::WorkerProfile> profiles;
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<double> cs(part.class_counts[i].begin(), part.class_counts[i].end());
    profiles.push_back(profile(i, latencies[i], cs));
  }
  return airfedga::make_environment(std::move(train), std::move(test), std::move(part),
                                    std::move(profiles));
}

}  // namespace testing
