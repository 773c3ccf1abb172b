#pragma once

#include <cstddef>
#include <vector>

#include "airfedga/datagen.hpp"
#include "airfedga/rng.hpp"

namespace airfedga {

struct WorkerProfile {
  std::size_t id = 0;
  double data_size = 0.0;                // d_i
  std::vector<double> class_sizes;       // d_i^k
  double kappa = 1.0;
  double latency = 0.0;                  // l_i = kappa * base latency
  double energy_budget = 0.0;            // per-transmission budget, joules
};

struct ProfileOptions {
  double base_latency = 1.0;
  double kappa_min = 1.0;
  double kappa_max = 10.0;
  double energy_budget = 10.0;
};

// kappa_i ~ U[kappa_min, kappa_max], drawn in worker-id order.
std::vector<WorkerProfile> make_profiles(const Partition& partition, const ProfileOptions& opts,
                                         Engine& engine);

}  // namespace airfedga
