#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace airfedga {

// Labeled samples stored row-major: sample i occupies
// features[i * num_features, (i + 1) * num_features).
struct Dataset {
  std::size_t num_features = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * num_features, num_features};
  }
  Dataset subset(std::span<const std::size_t> indices) const;
  std::vector<std::size_t> class_counts() const;

  bool operator==(const Dataset&) const = default;
};

struct Partition {
  std::size_t num_classes = 0;
  std::vector<std::vector<std::size_t>> assignments;
  std::vector<std::vector<std::size_t>> class_counts;  // d_i^k
  std::vector<std::size_t> sizes;                      // d_i
  std::size_t total = 0;                               // D
  std::vector<double> global_props;                    // lambda_k

  std::size_t num_workers() const { return assignments.size(); }
  std::vector<double> worker_props(std::size_t worker) const;

  bool operator==(const Partition&) const = default;
};

// Class-conditional Gaussians with unit noise. Each class mean lies
// `separation` away from the perpendicular bisector it shares with any other
// class mean (pairwise mean distance 2 * separation). When K exceeds the
// feature dimension the mean directions are random unit vectors drawn from
// the seed. Labels are balanced and shuffled.
Dataset generate_synthetic(std::uint64_t seed, std::size_t num_classes, std::size_t num_features,
                           std::size_t num_samples, double separation);

// Multiplies feature f by spread^(-f / (q - 1)). An invertible map, so the
// Bayes error is unchanged, but gradient steps along the shrunken axes slow
// down. spread = 1 is the identity.
void scale_features(Dataset& ds, double spread);

// Fresh samples from the same class means as generate_synthetic(seed, ...).
Dataset generate_holdout(std::uint64_t seed, std::size_t num_classes, std::size_t num_features,
                         std::size_t num_samples, double separation);

// Worker i holds classes c_i, c_i + 1, ..., c_i + cpw - 1 (mod K) with
// c_i = floor(i * K / N). Each class is split across its holders in equal
// shares, or in shares proportional to U[0.5, 1.5] weights when a jitter seed
// is given.
Partition partition_label_skew(const Dataset& ds, std::size_t num_workers,
                               std::size_t classes_per_worker,
                               std::optional<std::uint64_t> jitter_seed = std::nullopt);

// L1 distance between two class-proportion vectors.
double emd(std::span<const double> group_props, std::span<const double> global_props);

void to_json(nlohmann::json& j, const Dataset& ds);
void from_json(const nlohmann::json& j, Dataset& ds);
void to_json(nlohmann::json& j, const Partition& p);
void from_json(const nlohmann::json& j, Partition& p);

}  // namespace airfedga
