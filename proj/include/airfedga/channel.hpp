#pragma once

// Analog multiple-access channel at the vector-sum level: workers invert
// their channel gain, the server receives the data-size weighted sum of the
// local models plus one AWGN vector, then rescales.

#include <cstddef>
#include <span>
#include <vector>

#include "airfedga/learner.hpp"
#include "airfedga/rng.hpp"

namespace airfedga {

struct ChannelDraw {
  std::vector<double> gains;
  std::vector<double> noise;
  // Total noise power E||z||^2; each of the q entries has variance
  // noise_variance / q, so the aggregation cost C is the actual mean squared
  // error of the estimate.
  double noise_variance = 0.0;
};

// Rayleigh gains with unit mean power (h^2 ~ Exp(1)), one per worker, then
// the noise vector, drawn in that order.
ChannelDraw draw_channel(Engine& engine, std::size_t num_workers, std::size_t dim,
                         double noise_variance);

double transmit_power(double data_size, double sigma, double gain);
double energy(double power, std::span<const double> w);

struct Reception {
  std::vector<double> signal;
  std::vector<double> powers;
  std::vector<double> energies;
};

Reception receive(std::span<const ModelVector* const> models, std::span<const double> sizes,
                  double sigma, const ChannelDraw& draw);
Reception receive(std::span<const ModelVector> models, std::span<const double> sizes, double sigma,
                  const ChannelDraw& draw);

// w = (1 - sum(d_i) / D) * w_prev + y / (D * sqrt(eta))
ModelVector estimate_global(const ModelVector& w_prev, std::span<const double> signal,
                            std::span<const double> sizes, double total, double eta);

// w = (1 - sum(d_i) / D) * w_prev + sum(d_i * w_i) / D
ModelVector error_free_aggregate(const ModelVector& w_prev,
                                 std::span<const ModelVector* const> models,
                                 std::span<const double> sizes, double total);
ModelVector error_free_aggregate(const ModelVector& w_prev, std::span<const ModelVector> models,
                                 std::span<const double> sizes, double total);

}  // namespace airfedga
