#include "airfedga/channel.hpp"

#include <cmath>
#include <numeric>

#include "airfedga/error.hpp"
#include "airfedga/kernels.hpp"

namespace airfedga {
namespace {

std::vector<const ModelVector*> pointers(std::span<const ModelVector> models) {
  std::vector<const ModelVector*> out;
  out.reserve(models.size());
  for (const auto& m : models) {
    out.push_back(&m);
  }
  return out;
}

void check_group(std::span<const ModelVector* const> models, std::span<const double> sizes,
                 std::size_t dim) {
  if (models.empty()) {
    throw ValidationError("aggregation group is empty");
  }
  if (models.size() != sizes.size()) {
    throw ValidationError("model count and data-size count differ");
  }
  for (const auto* m : models) {
    if (m->size() != dim) {
      throw ValidationError("local model dimension mismatch");
    }
  }
}

}  // namespace

ChannelDraw draw_channel(Engine& engine, std::size_t num_workers, std::size_t dim,
                         double noise_variance) {
  if (!(noise_variance >= 0.0)) {
    throw ConfigError("noise variance must be non-negative");
  }
  ChannelDraw d;
  d.noise_variance = noise_variance;
  std::exponential_distribution<double> power(1.0);
  d.gains.resize(num_workers);
  for (auto& h : d.gains) {
    do {
      h = std::sqrt(power(engine));
    } while (h <= 0.0);
  }
  d.noise.assign(dim, 0.0);
  if (noise_variance > 0.0 && dim > 0) {
    std::normal_distribution<double> normal(0.0,
                                            std::sqrt(noise_variance / static_cast<double>(dim)));
    for (auto& z : d.noise) {
      z = normal(engine);
    }
  }
  return d;
}

double transmit_power(double data_size, double sigma, double gain) {
  if (!(gain > 0.0)) {
    throw ChannelError("channel gain must be positive");
  }
  return data_size * sigma / gain;
}

double energy(double power, std::span<const double> w) {
  return power * power * kernels::active().dot(w.data(), w.data(), w.size());
}

Reception receive(std::span<const ModelVector* const> models, std::span<const double> sizes,
                  double sigma, const ChannelDraw& draw) {
  const std::size_t dim = draw.noise.size();
  check_group(models, sizes, dim);
  if (draw.gains.size() != models.size()) {
    throw ValidationError("gain count does not match group size");
  }
  const auto& k = kernels::active();
  Reception r;
  r.signal = draw.noise;
  r.powers.resize(models.size());
  r.energies.resize(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    r.powers[i] = transmit_power(sizes[i], sigma, draw.gains[i]);
    r.energies[i] = energy(r.powers[i], *models[i]);
    // p * h with p = d * sigma / h: the gain cancels, so use d * sigma directly.
    k.axpy(sizes[i] * sigma, models[i]->data(), r.signal.data(), dim);
  }
  return r;
}

Reception receive(std::span<const ModelVector> models, std::span<const double> sizes, double sigma,
                  const ChannelDraw& draw) {
  const auto ptrs = pointers(models);
  return receive(std::span<const ModelVector* const>(ptrs), sizes, sigma, draw);
}

ModelVector estimate_global(const ModelVector& w_prev, std::span<const double> signal,
                            std::span<const double> sizes, double total, double eta) {
  if (!(eta > 0.0)) {
    throw ConfigError("denoising factor must be positive");
  }
  if (!(total > 0.0)) {
    throw ValidationError("total data size must be positive");
  }
  if (signal.size() != w_prev.size()) {
    throw ValidationError("received signal dimension mismatch");
  }
  const double share = std::accumulate(sizes.begin(), sizes.end(), 0.0) / total;
  ModelVector w(signal.begin(), signal.end());
  kernels::active().axpby(1.0 - share, w_prev.data(), 1.0 / (total * std::sqrt(eta)), w.data(),
                          w.size());
  return w;
}

ModelVector error_free_aggregate(const ModelVector& w_prev,
                                 std::span<const ModelVector* const> models,
                                 std::span<const double> sizes, double total) {
  check_group(models, sizes, w_prev.size());
  if (!(total > 0.0)) {
    throw ValidationError("total data size must be positive");
  }
  const auto& k = kernels::active();
  const double share = std::accumulate(sizes.begin(), sizes.end(), 0.0) / total;
  ModelVector w = w_prev;
  k.scale(1.0 - share, w.data(), w.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    k.axpy(sizes[i] / total, models[i]->data(), w.data(), w.size());
  }
  return w;
}

ModelVector error_free_aggregate(const ModelVector& w_prev, std::span<const ModelVector> models,
                                 std::span<const double> sizes, double total) {
  const auto ptrs = pointers(models);
  return error_free_aggregate(w_prev, std::span<const ModelVector* const>(ptrs), sizes, total);
}

}  // namespace airfedga
