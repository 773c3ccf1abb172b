#pragma once

// Multinomial logistic regression. A model is one flat vector: the K x q_in
// weight matrix row-major, followed by the K biases.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "airfedga/datagen.hpp"

namespace airfedga {

using ModelVector = std::vector<double>;

struct ModelShape {
  std::size_t num_classes = 0;
  std::size_t num_features = 0;

  std::size_t dim() const { return num_classes * (num_features + 1); }
  static ModelShape of(const Dataset& ds) { return {ds.num_classes, ds.num_features}; }
};

struct LearnerConfig {
  double learning_rate = 0.1;
  // Weight of (l2 / 2) * ||w||^2 added to every local loss.
  double l2 = 0.0;
};

ModelVector zero_model(const ModelShape& shape);

double loss(const ModelVector& w, const Dataset& data, double l2 = 0.0);
ModelVector gradient(const ModelVector& w, const Dataset& data, double l2 = 0.0);
// Fills `grad` and returns the loss in a single pass over the data.
double loss_and_gradient(const ModelVector& w, const Dataset& data, double l2, ModelVector& grad);

ModelVector local_update(const ModelVector& w, const Dataset& data, const LearnerConfig& cfg);

// Argmax class; ties go to the lowest class index.
int predict(const ModelVector& w, const ModelShape& shape, std::span<const double> x);
double accuracy(const ModelVector& w, const Dataset& test);

// Upper bound on the Hessian spectral norm of the mean loss:
// l2 + 0.5 * lambda_max(X'X) / n with X augmented by a ones column.
double smoothness_estimate(const Dataset& data, double l2, std::size_t iterations = 200);

struct TrainResult {
  ModelVector w;
  double loss = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
};

// Full-batch gradient descent to a gradient-norm tolerance.
TrainResult train_centralized(const Dataset& data, const LearnerConfig& cfg,
                              std::size_t max_iterations, double gradient_tolerance = 1e-8);

bool all_finite(const ModelVector& w);

// Little-endian: u64 length, then that many IEEE-754 binary64 values.
std::string to_binary(const ModelVector& w);
ModelVector from_binary(std::string_view bytes);

}  // namespace airfedga
