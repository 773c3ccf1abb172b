#include "airfedga/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "airfedga/error.hpp"
#include "airfedga/rng.hpp"

namespace airfedga {
namespace {

constexpr double kPropTolerance = 1e-9;

void check_dims(std::size_t num_classes, std::size_t num_features, std::size_t num_samples,
                double separation) {
  if (num_classes < 2) {
    throw ConfigError("class count must be at least 2");
  }
  if (num_features < 1) {
    throw ConfigError("feature dimension must be at least 1");
  }
  if (num_samples < num_classes) {
    throw ConfigError("sample count must be at least the class count");
  }
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw ConfigError("separation must be a finite non-negative number");
  }
}

std::vector<double> class_means(std::uint64_t seed, std::size_t num_classes,
                                std::size_t num_features, double separation) {
  std::vector<double> means(num_classes * num_features, 0.0);
  const double radius = separation * std::sqrt(2.0);
  if (num_classes <= num_features) {
    for (std::size_t k = 0; k < num_classes; ++k) {
      means[k * num_features + k] = radius;
    }
    return means;
  }
  auto engine = make_engine(seed, "class-means");
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < num_classes; ++k) {
    double norm2 = 0.0;
    for (std::size_t f = 0; f < num_features; ++f) {
      const double v = normal(engine);
      means[k * num_features + f] = v;
      norm2 += v * v;
    }
    const double s = norm2 > 0.0 ? radius / std::sqrt(norm2) : 0.0;
    for (std::size_t f = 0; f < num_features; ++f) {
      means[k * num_features + f] *= s;
    }
  }
  return means;
}

Dataset draw_samples(std::uint64_t seed, std::string_view stream, std::size_t num_classes,
                     std::size_t num_features, std::size_t num_samples, double separation) {
  check_dims(num_classes, num_features, num_samples, separation);
  const auto means = class_means(seed, num_classes, num_features, separation);

  Dataset ds;
  ds.num_classes = num_classes;
  ds.num_features = num_features;
  ds.labels.resize(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) {
    ds.labels[i] = static_cast<int>(i % num_classes);
  }
  auto engine = make_engine(seed, stream);
  std::shuffle(ds.labels.begin(), ds.labels.end(), engine);

  std::normal_distribution<double> normal(0.0, 1.0);
  ds.features.resize(num_samples * num_features);
  for (std::size_t i = 0; i < num_samples; ++i) {
    const double* mean = means.data() + static_cast<std::size_t>(ds.labels[i]) * num_features;
    for (std::size_t f = 0; f < num_features; ++f) {
      ds.features[i * num_features + f] = mean[f] + normal(engine);
    }
  }
  return ds;
}

// Largest-remainder split of `count` items by `weights`; ties in remainder go
// to the lower position.
std::vector<std::size_t> apportion(std::size_t count, std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> shares(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(count) * weights[i] / total;
    shares[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += shares[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < count; ++r, ++assigned) {
    ++shares[remainders[r % remainders.size()].second];
  }
  return shares;
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.num_features = num_features;
  out.num_classes = num_classes;
  out.labels.reserve(indices.size());
  out.features.reserve(indices.size() * num_features);
  for (const std::size_t i : indices) {
    if (i >= size()) {
      throw ValidationError("sample index " + std::to_string(i) + " out of range");
    }
    out.labels.push_back(labels[i]);
    const auto r = row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
  }
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (const int y : labels) {
    ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

std::vector<double> Partition::worker_props(std::size_t worker) const {
  std::vector<double> props(num_classes, 0.0);
  const double d = static_cast<double>(sizes.at(worker));
  for (std::size_t k = 0; k < num_classes; ++k) {
    props[k] = static_cast<double>(class_counts[worker][k]) / d;
  }
  return props;
}

Dataset generate_synthetic(std::uint64_t seed, std::size_t num_classes, std::size_t num_features,
                           std::size_t num_samples, double separation) {
  return draw_samples(seed, "samples", num_classes, num_features, num_samples, separation);
}

void scale_features(Dataset& ds, double spread) {
  if (!(spread >= 1.0) || !std::isfinite(spread)) {
    throw ConfigError("feature scale spread must be finite and at least 1");
  }
  const std::size_t q = ds.num_features;
  if (spread == 1.0 || q < 2) {
    return;
  }
  std::vector<double> scale(q);
  for (std::size_t f = 0; f < q; ++f) {
    scale[f] = std::pow(spread, -static_cast<double>(f) / static_cast<double>(q - 1));
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t f = 0; f < q; ++f) {
      ds.features[i * q + f] *= scale[f];
    }
  }
}

Dataset generate_holdout(std::uint64_t seed, std::size_t num_classes, std::size_t num_features,
                         std::size_t num_samples, double separation) {
  return draw_samples(seed, "holdout", num_classes, num_features, num_samples, separation);
}

Partition partition_label_skew(const Dataset& ds, std::size_t num_workers,
                               std::size_t classes_per_worker,
                               std::optional<std::uint64_t> jitter_seed) {
  const std::size_t K = ds.num_classes;
  if (num_workers == 0) {
    throw ConfigError("worker count must be positive");
  }
  if (classes_per_worker == 0 || classes_per_worker > K) {
    throw ConfigError("classes per worker must be in [1, " + std::to_string(K) + "]");
  }

  std::vector<std::vector<std::size_t>> holders(K);
  for (std::size_t i = 0; i < num_workers; ++i) {
    const std::size_t first = i * K / num_workers;
    for (std::size_t c = 0; c < classes_per_worker; ++c) {
      holders[(first + c) % K].push_back(i);
    }
  }

  std::vector<double> weights(num_workers, 1.0);
  if (jitter_seed) {
    auto engine = make_engine(*jitter_seed, "size-jitter");
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (auto& w : weights) {
      w = u(engine);
    }
  }

  std::vector<std::vector<std::size_t>> by_class(K);
  for (std::size_t s = 0; s < ds.size(); ++s) {
    by_class[static_cast<std::size_t>(ds.labels[s])].push_back(s);
  }

  Partition p;
  p.num_classes = K;
  p.assignments.assign(num_workers, {});
  p.class_counts.assign(num_workers, std::vector<std::size_t>(K, 0));
  p.sizes.assign(num_workers, 0);
  p.total = ds.size();

  for (std::size_t k = 0; k < K; ++k) {
    if (by_class[k].empty()) {
      continue;
    }
    if (holders[k].empty()) {
      throw ConfigError("class " + std::to_string(k) + " is not held by any worker");
    }
    std::vector<double> w;
    for (const std::size_t i : holders[k]) {
      w.push_back(weights[i]);
    }
    const auto shares = apportion(by_class[k].size(), w);
    std::size_t next = 0;
    for (std::size_t h = 0; h < holders[k].size(); ++h) {
      const std::size_t i = holders[k][h];
      for (std::size_t c = 0; c < shares[h]; ++c) {
        p.assignments[i].push_back(by_class[k][next++]);
      }
      p.class_counts[i][k] += shares[h];
      p.sizes[i] += shares[h];
    }
  }

  for (std::size_t i = 0; i < num_workers; ++i) {
    if (p.sizes[i] == 0) {
      throw ConfigError("worker " + std::to_string(i) + " receives no samples");
    }
    std::sort(p.assignments[i].begin(), p.assignments[i].end());
  }

  p.global_props.assign(K, 0.0);
  const auto counts = ds.class_counts();
  for (std::size_t k = 0; k < K; ++k) {
    p.global_props[k] = static_cast<double>(counts[k]) / static_cast<double>(p.total);
  }
  return p;
}

double emd(std::span<const double> group_props, std::span<const double> global_props) {
  if (group_props.size() != global_props.size()) {
    throw ValidationError("proportion vectors differ in length");
  }
  auto normalized = [](std::span<const double> v, const char* what) {
    double sum = 0.0;
    for (const double x : v) {
      if (!(x >= 0.0)) {
        throw ValidationError(std::string(what) + " has a negative or NaN entry");
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > kPropTolerance) {
      throw ValidationError(std::string(what) + " does not sum to 1");
    }
    return sum;
  };
  const double sa = normalized(group_props, "group proportions");
  const double sb = normalized(global_props, "global proportions");
  double d = 0.0;
  for (std::size_t k = 0; k < group_props.size(); ++k) {
    d += std::abs(global_props[k] / sb - group_props[k] / sa);
  }
  return d;
}

void to_json(nlohmann::json& j, const Dataset& ds) {
  nlohmann::json samples = nlohmann::json::array();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto r = ds.row(i);
    samples.push_back({{"x", std::vector<double>(r.begin(), r.end())}, {"y", ds.labels[i]}});
  }
  j = {{"num_classes", ds.num_classes},
       {"num_features", ds.num_features},
       {"samples", std::move(samples)}};
}

void from_json(const nlohmann::json& j, Dataset& ds) {
  ds = Dataset{};
  ds.num_classes = j.at("num_classes").get<std::size_t>();
  ds.num_features = j.at("num_features").get<std::size_t>();
  for (const auto& s : j.at("samples")) {
    const auto x = s.at("x").get<std::vector<double>>();
    const int y = s.at("y").get<int>();
    if (x.size() != ds.num_features) {
      throw ValidationError("sample feature length mismatch");
    }
    if (y < 0 || static_cast<std::size_t>(y) >= ds.num_classes) {
      throw ValidationError("sample label out of range");
    }
    ds.features.insert(ds.features.end(), x.begin(), x.end());
    ds.labels.push_back(y);
  }
}

void to_json(nlohmann::json& j, const Partition& p) {
  j = {{"num_classes", p.num_classes}, {"total", p.total},         {"sizes", p.sizes},
       {"class_counts", p.class_counts}, {"global_props", p.global_props},
       {"assignments", p.assignments}};
}

void from_json(const nlohmann::json& j, Partition& p) {
  p.num_classes = j.at("num_classes").get<std::size_t>();
  p.total = j.at("total").get<std::size_t>();
  p.sizes = j.at("sizes").get<std::vector<std::size_t>>();
  p.class_counts = j.at("class_counts").get<std::vector<std::vector<std::size_t>>>();
  p.global_props = j.at("global_props").get<std::vector<double>>();
  p.assignments = j.at("assignments").get<std::vector<std::vector<std::size_t>>>();
}

}  // namespace airfedga
