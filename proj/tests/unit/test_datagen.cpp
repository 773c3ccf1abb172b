#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "airfedga/datagen.hpp"
#include "airfedga/error.hpp"
#include "airfedga/learner.hpp"
#include "helpers.hpp"

using namespace airfedga;

TEST_CASE("generate_synthetic balances classes and is deterministic") {
  const auto ds = generate_synthetic(1, 2, 2, 4, 10.0);
  CHECK(ds.size() == 4);
  CHECK(ds.class_counts() == std::vector<std::size_t>{2, 2});
  CHECK(generate_synthetic(1, 2, 2, 4, 10.0) == ds);
  CHECK_FALSE(generate_synthetic(2, 2, 2, 4, 10.0) == ds);

  const auto odd = generate_synthetic(3, 7, 5, 100, 1.0);
  const auto counts = odd.class_counts();
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  CHECK(*hi - *lo <= 1);
  for (const int y : odd.labels) {
    CHECK((y >= 0 && y < 7));
  }
}

TEST_CASE("generate_synthetic rejects bad dimensions") {
  CHECK_THROWS_AS(generate_synthetic(1, 1, 2, 4, 1.0), ConfigError);
  CHECK_THROWS_AS(generate_synthetic(1, 2, 0, 4, 1.0), ConfigError);
  CHECK_THROWS_AS(generate_synthetic(1, 3, 2, 2, 1.0), ConfigError);
  CHECK_THROWS_AS(generate_synthetic(1, 2, 2, 4, -1.0), ConfigError);
}

TEST_CASE("holdout shares the class means but not the samples") {
  const auto tr = generate_synthetic(4, 3, 3, 3000, 2.0);
  const auto te = generate_holdout(4, 3, 3, 3000, 2.0);
  CHECK_FALSE(tr.features == te.features);
  // class-0 mean sits on the first axis at 2 * sqrt(2)
  double s_tr = 0.0, s_te = 0.0;
  std::size_t n_tr = 0, n_te = 0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (tr.labels[i] == 0) {
      s_tr += tr.row(i)[0];
      ++n_tr;
    }
    if (te.labels[i] == 0) {
      s_te += te.row(i)[0];
      ++n_te;
    }
  }
  CHECK(s_tr / n_tr == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(0.05));
  CHECK(s_te / n_te == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(0.05));
}

TEST_CASE("centralized model on separated clusters reaches the recorded accuracy") {
  // Recorded oracle: 0.9905 held-out accuracy; an independent Monte Carlo of
  // the Bayes classifier for this geometry gives 0.990.
  const auto tr = generate_synthetic(1, 10, 20, 10000, 3.0);
  const auto te = generate_holdout(1, 10, 20, 2000, 3.0);
  LearnerConfig c;
  c.learning_rate = 0.75 / smoothness_estimate(tr, 0.0);
  const auto r = train_centralized(tr, c, 3000, 1e-6);
  const double acc = accuracy(r.w, te);
  CHECK(acc >= 0.90);
  CHECK(acc == doctest::Approx(0.9905).epsilon(0.002));
}

TEST_CASE("scale_features is an invertible per-axis map") {
  auto ds = generate_synthetic(2, 3, 4, 30, 1.0);
  const auto orig = ds;
  scale_features(ds, 1.0);
  CHECK(ds == orig);
  scale_features(ds, 8.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(ds.row(i)[0] == orig.row(i)[0]);
    CHECK(ds.row(i)[3] == doctest::Approx(orig.row(i)[3] / 8.0));
    CHECK(ds.row(i)[1] == doctest::Approx(orig.row(i)[1] / 2.0));
  }
  CHECK_THROWS_AS(scale_features(ds, 0.5), ConfigError);
}

TEST_CASE("one-hot label skew matches the block layout") {
  const auto ds = generate_synthetic(1, 10, 3, 10000, 1.0);
  const auto p = partition_label_skew(ds, 100, 1, std::nullopt);
  REQUIRE(p.num_workers() == 100);
  for (std::size_t i = 0; i < 100; ++i) {
    const auto props = p.worker_props(i);
    for (std::size_t k = 0; k < 10; ++k) {
      CHECK(props[k] == (k == i / 10 ? 1.0 : 0.0));
    }
    CHECK(emd(props, p.global_props) == doctest::Approx(1.8).epsilon(1e-12));
  }
}

TEST_CASE("full coverage is IID and symmetric splits are equal") {
  const auto ds = generate_synthetic(1, 10, 3, 1000, 1.0);
  const auto iid = partition_label_skew(ds, 10, 10, std::nullopt);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto props = iid.worker_props(i);
    for (std::size_t k = 0; k < 10; ++k) {
      CHECK(props[k] == doctest::Approx(iid.global_props[k]));
    }
  }
  const auto two = generate_synthetic(1, 2, 2, 40, 1.0);
  const auto p = partition_label_skew(two, 4, 1, std::nullopt);
  CHECK(p.sizes == std::vector<std::size_t>{10, 10, 10, 10});
  CHECK_THROWS_AS(partition_label_skew(two, 4, 3, std::nullopt), ConfigError);
}

TEST_CASE("partition conservation and mixture identity hold with size jitter") {
  const auto ds = generate_synthetic(6, 5, 3, 2000, 1.0);
  for (const std::size_t cpw : {1u, 2u, 5u}) {
    const auto p = partition_label_skew(ds, 20, cpw, 99);
    std::set<std::size_t> seen;
    std::size_t covered = 0;
    for (const auto& a : p.assignments) {
      seen.insert(a.begin(), a.end());
      covered += a.size();
    }
    CHECK(covered == ds.size());
    CHECK(seen.size() == ds.size());
    const auto global = ds.class_counts();
    for (std::size_t k = 0; k < 5; ++k) {
      std::size_t sum = 0;
      for (std::size_t i = 0; i < 20; ++i) {
        sum += p.class_counts[i][k];
      }
      CHECK(sum == global[k]);
    }
    for (std::size_t i = 0; i < 20; ++i) {
      CHECK(std::accumulate(p.class_counts[i].begin(), p.class_counts[i].end(), std::size_t{0}) ==
            p.sizes[i]);
    }
    CHECK(std::accumulate(p.sizes.begin(), p.sizes.end(), std::size_t{0}) == p.total);
    // sum_i alpha_i * alpha_i^k = lambda_k
    for (std::size_t k = 0; k < 5; ++k) {
      double mix = 0.0;
      for (std::size_t i = 0; i < 20; ++i) {
        mix += static_cast<double>(p.sizes[i]) / p.total * p.worker_props(i)[k];
      }
      CHECK(std::abs(mix - p.global_props[k]) <= 1e-12);
    }
  }
  const auto jittered = partition_label_skew(ds, 20, 1, 99);
  const auto [lo, hi] = std::minmax_element(jittered.sizes.begin(), jittered.sizes.end());
  CHECK(*lo < *hi);
}

TEST_CASE("emd examples and metric properties") {
  std::vector<double> uniform(10, 0.1);
  std::vector<double> onehot(10, 0.0);
  onehot[0] = 1.0;
  CHECK(emd(onehot, uniform) == doctest::Approx(1.8));
  CHECK(emd(uniform, uniform) == 0.0);
  std::vector<double> half(10, 0.0);
  half[0] = half[1] = 0.5;
  CHECK(emd(half, uniform) == doctest::Approx(1.6));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = testing::random_simplex(rng, 6);
    const auto b = testing::random_simplex(rng, 6);
    const auto c = testing::random_simplex(rng, 6);
    CHECK(emd(a, b) == doctest::Approx(emd(b, a)));
    CHECK(emd(a, b) <= emd(a, c) + emd(c, b) + 1e-12);
    CHECK(emd(a, b) < 2.0);
  }
}

TEST_CASE("emd validates its inputs") {
  std::vector<double> a{0.5, 0.5};
  std::vector<double> b{0.5, 0.5 + 5e-10};  // within tolerance: renormalized
  CHECK(emd(a, b) == doctest::Approx(0.0).epsilon(1e-9));
  std::vector<double> bad{0.5, 0.6};
  CHECK_THROWS_AS(emd(a, bad), ValidationError);
  std::vector<double> shorter{1.0};
  CHECK_THROWS_AS(emd(a, shorter), ValidationError);
}

TEST_CASE("dataset and partition survive a JSON round trip") {
  const auto ds = generate_synthetic(8, 3, 2, 30, 1.5);
  const auto p = partition_label_skew(ds, 6, 1, 4);
  nlohmann::json jd = ds;
  nlohmann::json jp = p;
  CHECK(jd.get<Dataset>() == ds);
  CHECK(jp.get<Partition>() == p);
}
