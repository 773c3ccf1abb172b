#include <doctest.h>

#include <cmath>
#include <random>

#include "airfedga/bounds.hpp"
#include "airfedga/error.hpp"
#include "airfedga/sim.hpp"
#include "helpers.hpp"

using namespace airfedga;

namespace {

ConvergenceParams single(double mu, double L, double gamma, double G, double emd, double c) {
  return {mu, L, gamma, G, 0.0, {1.0}, {1.0}, {emd}, c};
}

}  // namespace

TEST_CASE("rho worked values") {
  auto p = single(1.0, 2.0, 0.4, 1.0, 1.0, 0.0);
  CHECK(rho(p) == doctest::Approx(1.0 - (2 * 0.4 - 0.5)));
  p.mu = 0.0;
  CHECK(rho(p) == 1.0);
  p.mu = 3.0;
  CHECK_THROWS_AS(rho(p), DomainError);
}

TEST_CASE("rho increases toward 1 with staleness") {
  auto p = single(0.5, 1.0, 0.75, 1.0, 0.0, 0.0);
  double prev = 0.0;
  for (const double tau : {0.0, 1.0, 2.0, 5.0, 20.0, 100.0}) {
    p.tau_max = tau;
    const double r = rho(p);
    CHECK(r > prev);
    CHECK(r < 1.0);
    prev = r;
  }
}

TEST_CASE("delta worked values") {
  CHECK(delta(single(1.0, 2.0, 0.4, 1.0, 1.0, 0.0)) == doctest::Approx(4.0 / 3.0));
  CHECK(delta(single(1.0, 2.0, 0.4, 1.0, 0.0, 0.0)) == 0.0);
  // C adds L^2 C / (2 mu gamma L - mu)
  CHECK(delta(single(1.0, 2.0, 0.4, 1.0, 0.0, 0.3)) == doctest::Approx(4 * 0.3 / 0.6));
  CHECK_THROWS_AS(delta(single(1.0, 2.0, 0.2, 1.0, 0.0, 0.0)), DomainError);
  // Lambda scaled by c scales the EMD term by c^2
  CHECK(delta(single(1.0, 2.0, 0.4, 1.0, 3.0, 0.0)) == doctest::Approx(9 * 4.0 / 3.0));
}

TEST_CASE("delta strictly increases in each group EMD") {
  ConvergenceParams p{0.5, 1.0, 0.75, 1.0, 2.0, {0.2, 0.5, 0.3}, {0.5, 0.2, 0.3}, {0.5, 0.5, 0.5},
                      0.1};
  for (std::size_t j = 0; j < 3; ++j) {
    auto q = p;
    q.emd[j] += 0.1;
    CHECK(delta(q) > delta(p));
  }
}

TEST_CASE("rho and delta do not depend on group labels") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    ConvergenceParams p{0.3, 1.0, 0.7, 0.8, 3.0, testing::random_simplex(rng, 5),
                        testing::random_simplex(rng, 5), {}, 0.05};
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int j = 0; j < 5; ++j) {
      p.emd.push_back(u(rng));
    }
    std::vector<std::size_t> perm{3, 0, 4, 1, 2};
    auto q = p;
    for (std::size_t j = 0; j < 5; ++j) {
      q.psi[j] = p.psi[perm[j]];
      q.beta[j] = p.beta[perm[j]];
      q.emd[j] = p.emd[perm[j]];
    }
    CHECK(rho(q) == doctest::Approx(rho(p)).epsilon(1e-14));
    CHECK(delta(q) == doctest::Approx(delta(p)).epsilon(1e-14));
  }
}

TEST_CASE("envelope decreases to delta") {
  CHECK(envelope(0.5, 4.0, 1.0, 0.0) == 5.0);
  CHECK(envelope(0.5, 4.0, 1.0, 2.0) == 2.0);
  double prev = 1e300;
  for (int t = 0; t < 200; ++t) {
    const double e = envelope(0.9, 3.0, 0.25, t);
    CHECK(e <= prev);
    CHECK(e >= 0.25);
    prev = e;
  }
  CHECK(prev == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("delayed recursion stays under its bound") {
  // y = 0, tau = 0: a plain geometric series; saturated at Q0 = delta the
  // bound holds with equality.
  const auto r0 = recursion_check(0.6, 0.0, 0.4, 0, 20, 100, 1);
  CHECK(r0.violations == 0);
  CHECK(r0.checks == 2000);
  const auto rz = recursion_check(0.3, 0.4, 0.0, 4, 50, 200, 2);
  CHECK(rz.violations == 0);
  const auto mc = recursion_monte_carlo(300, 10, 200, 7);
  CHECK(mc.violations == 0);
  CHECK(mc.sequences == 300);
  CHECK_THROWS_AS(recursion_check(0.6, 0.5, 0.1, 1, 1, 10, 1), DomainError);
}

TEST_CASE("gap curve and coverage") {
  std::vector<RoundLog> logs(3);
  logs[0].loss = 1.5;
  logs[1].loss = 1.2;
  logs[2].loss = 1.1;
  const auto gaps = empirical_gap_curve(logs, 2.3, 1.0);
  REQUIRE(gaps.size() == 4);
  CHECK(gaps[0] == doctest::Approx(1.3));
  CHECK(gaps[3] == doctest::Approx(0.1));
  CHECK(envelope_coverage(gaps, 0.9, 0.0, 0) == 1.0);
  // only the last gap (0.1) is under 0.15 + tiny
  CHECK(envelope_coverage(gaps, 0.01, 0.15, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(envelope_coverage(gaps, 0.01, 0.15, 5) == 1.0);
}

TEST_CASE("gradient probe is positive and deterministic") {
  const auto env = testing::small_environment(3, 6, {1, 2, 3, 4, 5, 6});
  const double G = estimate_gradient_bound(env.shards, 0.0, 20, 1.0, 3);
  CHECK(G > 0.0);
  CHECK(G == estimate_gradient_bound(env.shards, 0.0, 20, 1.0, 3));
  CHECK_THROWS_AS(estimate_gradient_bound(std::vector<Dataset>{}, 0.0, 1, 1.0, 1),
                  ValidationError);
}
