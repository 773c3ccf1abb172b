#include "airfedga/profile.hpp"

#include "airfedga/error.hpp"

namespace airfedga {

std::vector<WorkerProfile> make_profiles(const Partition& partition, const ProfileOptions& opts,
                                         Engine& engine) {
  if (!(opts.kappa_min >= 1.0) || !(opts.kappa_max >= opts.kappa_min)) {
    throw ConfigError("heterogeneity range must satisfy 1 <= kappa_min <= kappa_max");
  }
  if (!(opts.base_latency > 0.0)) {
    throw ConfigError("base latency must be positive");
  }
  if (!(opts.energy_budget > 0.0)) {
    throw ConfigError("energy budget must be positive");
  }
  std::uniform_real_distribution<double> kappa(opts.kappa_min, opts.kappa_max);
  std::vector<WorkerProfile> out(partition.num_workers());
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& p = out[i];
    p.id = i;
    p.data_size = static_cast<double>(partition.sizes[i]);
    p.class_sizes.assign(partition.class_counts[i].begin(), partition.class_counts[i].end());
    p.kappa = opts.kappa_min == opts.kappa_max ? opts.kappa_min : kappa(engine);
    p.latency = p.kappa * opts.base_latency;
    p.energy_budget = opts.energy_budget;
  }
  return out;
}

}  // namespace airfedga
