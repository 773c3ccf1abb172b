#include "airfedga/learner.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>

#include "airfedga/error.hpp"
#include "airfedga/kernels.hpp"

namespace airfedga {
namespace {

void check_inputs(const ModelVector& w, const Dataset& data) {
  if (data.empty()) {
    throw ValidationError("dataset is empty");
  }
  if (w.size() != ModelShape::of(data).dim()) {
    throw ValidationError("model dimension " + std::to_string(w.size()) +
                          " does not match data shape " +
                          std::to_string(ModelShape::of(data).dim()));
  }
}

// In-place softmax of logits; returns log-sum-exp.
double softmax(std::vector<double>& z) {
  double m = -std::numeric_limits<double>::infinity();
  for (const double v : z) {
    m = std::max(m, v);
  }
  double s = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    s += v;
  }
  for (double& v : z) {
    v /= s;
  }
  return m + std::log(s);
}

double eval(const ModelVector& w, const Dataset& data, double l2, ModelVector* grad) {
  check_inputs(w, data);
  const auto& k = kernels::active();
  const std::size_t K = data.num_classes;
  const std::size_t F = data.num_features;
  const double* weights = w.data();
  const double* bias = w.data() + K * F;
  const double inv_n = 1.0 / static_cast<double>(data.size());

  if (grad) {
    grad->assign(w.size(), 0.0);
  }
  std::vector<double> logits(K);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double* x = data.features.data() + i * F;
    const auto y = static_cast<std::size_t>(data.labels[i]);
    k.gemv_bias(weights, K, F, x, bias, logits.data());
    const double zy = logits[y];
    total += softmax(logits) - zy;
    if (grad) {
      logits[y] -= 1.0;
      for (auto& v : logits) {
        v *= inv_n;
      }
      k.rank1_update(logits.data(), K, F, x, grad->data());
      k.axpy(1.0, logits.data(), grad->data() + K * F, K);
    }
  }
  double value = total * inv_n;
  if (l2 != 0.0) {
    value += 0.5 * l2 * k.dot(w.data(), w.data(), w.size());
    if (grad) {
      k.axpy(l2, w.data(), grad->data(), w.size());
    }
  }
  return value;
}

}  // namespace

ModelVector zero_model(const ModelShape& shape) { return ModelVector(shape.dim(), 0.0); }

double loss(const ModelVector& w, const Dataset& data, double l2) {
  return eval(w, data, l2, nullptr);
}

ModelVector gradient(const ModelVector& w, const Dataset& data, double l2) {
  ModelVector g;
  eval(w, data, l2, &g);
  return g;
}

double loss_and_gradient(const ModelVector& w, const Dataset& data, double l2, ModelVector& grad) {
  return eval(w, data, l2, &grad);
}

ModelVector local_update(const ModelVector& w, const Dataset& data, const LearnerConfig& cfg) {
  ModelVector out = w;
  if (cfg.learning_rate == 0.0) {
    check_inputs(w, data);
    return out;
  }
  const auto g = gradient(w, data, cfg.l2);
  kernels::active().axpy(-cfg.learning_rate, g.data(), out.data(), out.size());
  if (!all_finite(out)) {
    throw DomainError("local update produced a non-finite model");
  }
  return out;
}

int predict(const ModelVector& w, const ModelShape& shape, std::span<const double> x) {
  const std::size_t K = shape.num_classes;
  const std::size_t F = shape.num_features;
  std::vector<double> logits(K);
  kernels::active().gemv_bias(w.data(), K, F, x.data(), w.data() + K * F, logits.data());
  std::size_t best = 0;
  for (std::size_t c = 1; c < K; ++c) {
    if (logits[c] > logits[best]) {
      best = c;
    }
  }
  return static_cast<int>(best);
}

double accuracy(const ModelVector& w, const Dataset& test) {
  check_inputs(w, test);
  const auto shape = ModelShape::of(test);
  std::size_t right = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (predict(w, shape, test.row(i)) == test.labels[i]) {
      ++right;
    }
  }
  return static_cast<double>(right) / static_cast<double>(test.size());
}

double smoothness_estimate(const Dataset& data, double l2, std::size_t iterations) {
  if (data.empty()) {
    throw ValidationError("dataset is empty");
  }
  const std::size_t F = data.num_features;
  const std::size_t dim = F + 1;
  const auto& k = kernels::active();
  std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::vector<double> next(dim);
  std::vector<double> xa(dim, 1.0);
  double lambda = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      std::memcpy(xa.data(), data.features.data() + i * F, F * sizeof(double));
      k.axpy(k.dot(xa.data(), v.data(), dim), xa.data(), next.data(), dim);
    }
    const double norm = std::sqrt(k.dot(next.data(), next.data(), dim));
    if (norm == 0.0) {
      break;
    }
    lambda = norm;
    for (std::size_t j = 0; j < dim; ++j) {
      v[j] = next[j] / norm;
    }
  }
  return l2 + 0.5 * lambda / static_cast<double>(data.size());
}

TrainResult train_centralized(const Dataset& data, const LearnerConfig& cfg,
                              std::size_t max_iterations, double gradient_tolerance) {
  TrainResult r;
  r.w = zero_model(ModelShape::of(data));
  ModelVector g;
  const auto& k = kernels::active();
  for (r.iterations = 0; r.iterations < max_iterations; ++r.iterations) {
    r.loss = loss_and_gradient(r.w, data, cfg.l2, g);
    r.gradient_norm = std::sqrt(k.dot(g.data(), g.data(), g.size()));
    if (r.gradient_norm <= gradient_tolerance) {
      return r;
    }
    k.axpy(-cfg.learning_rate, g.data(), r.w.data(), r.w.size());
  }
  r.loss = loss_and_gradient(r.w, data, cfg.l2, g);
  r.gradient_norm = std::sqrt(k.dot(g.data(), g.data(), g.size()));
  return r;
}

bool all_finite(const ModelVector& w) {
  for (const double v : w) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  return true;
}

std::string to_binary(const ModelVector& w) {
  static_assert(std::endian::native == std::endian::little, "little-endian host expected");
  std::string out(8 + 8 * w.size(), '\0');
  const std::uint64_t n = w.size();
  std::memcpy(out.data(), &n, 8);
  std::memcpy(out.data() + 8, w.data(), 8 * w.size());
  return out;
}

ModelVector from_binary(std::string_view bytes) {
  if (bytes.size() < 8) {
    throw ValidationError("model blob shorter than its length prefix");
  }
  std::uint64_t n = 0;
  std::memcpy(&n, bytes.data(), 8);
  if (bytes.size() != 8 + 8 * n) {
    throw ValidationError("model blob length does not match its prefix");
  }
  ModelVector w(n);
  std::memcpy(w.data(), bytes.data() + 8, 8 * n);
  return w;
}

}  // namespace airfedga
