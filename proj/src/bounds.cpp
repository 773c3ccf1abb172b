#include "airfedga/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "airfedga/error.hpp"
#include "airfedga/grouping.hpp"
#include "airfedga/kernels.hpp"
#include "airfedga/rng.hpp"
#include "airfedga/sim.hpp"

namespace airfedga {
namespace {

double weight_sum(const ConvergenceParams& p) {
  if (p.psi.size() != p.beta.size() || p.psi.size() != p.emd.size()) {
    throw ValidationError("per-group vectors differ in length");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < p.psi.size(); ++j) {
    s += p.psi[j] * p.beta[j];
  }
  return s;
}

}  // namespace

ConvergenceParams params_from_plan(const GroupPlan& plan, double mu, double L, double gamma,
                                   double G, double tau_max, double c_max) {
  ConvergenceParams p{mu, L, gamma, G, tau_max, {}, {}, {}, c_max};
  for (const auto& g : plan.groups) {
    p.psi.push_back(g.psi);
    p.beta.push_back(g.beta);
    p.emd.push_back(g.emd);
  }
  return p;
}

double rho(const ConvergenceParams& p) {
  if (p.mu < 0.0 || p.mu > p.L) {
    throw DomainError("need 0 <= mu <= L");
  }
  const double bracket = 1.0 - (2.0 * p.mu * p.gamma - p.mu / p.L) * weight_sum(p);
  if (!(bracket > 0.0 && bracket <= 1.0)) {
    throw DomainError("contraction factor base lies outside (0, 1]");
  }
  return std::pow(bracket, 1.0 / (1.0 + p.tau_max));
}

double delta(const ConvergenceParams& p) {
  const double denom_rate = 2.0 * p.mu * p.gamma * p.L - p.mu;
  if (!(denom_rate > 0.0)) {
    throw DomainError("need 2 mu gamma L - mu > 0");
  }
  const double w = weight_sum(p);
  if (!(w > 0.0)) {
    throw DomainError("group weights sum to zero");
  }
  double numer = 0.0;
  for (std::size_t j = 0; j < p.psi.size(); ++j) {
    numer += p.psi[j] * p.beta[j] *
             (p.gamma * p.L * p.emd[j] * p.emd[j] * p.G * p.G + p.L * p.L * p.c_max);
  }
  return numer / (denom_rate * w);
}

double envelope(double rho_value, double initial_gap, double delta_value, double t) {
  return std::pow(rho_value, t) * initial_gap + delta_value;
}

RecursionReport recursion_check(double x, double y, double z, std::size_t tau_max, std::size_t trials,
                          std::size_t steps, std::uint64_t seed) {
  if (x < 0.0 || y < 0.0 || z < 0.0 || !(x + y < 1.0)) {
    throw DomainError("need x, y, z >= 0 and x + y < 1");
  }
  const double r = std::pow(x + y, 1.0 / (1.0 + static_cast<double>(tau_max)));
  const double d = z / (1.0 - x - y);
  auto engine = make_engine(seed, "recursion");
  std::uniform_real_distribution<double> q0_dist(0.0, 10.0);

  RecursionReport rep;
  rep.worst_slack = std::numeric_limits<double>::infinity();
  std::vector<double> q(steps + 1);
  for (std::size_t s = 0; s < trials; ++s) {
    q[0] = q0_dist(engine);
    ++rep.sequences;
    double rt = 1.0;
    for (std::size_t t = 1; t <= steps; ++t) {
      const std::size_t lo = t - 1 >= tau_max ? t - 1 - tau_max : 0;
      std::uniform_int_distribution<std::size_t> delay(lo, t - 1);
      q[t] = x * q[t - 1] + y * q[delay(engine)] + z;
      rt *= r;
      const double bound = rt * q[0] + d;
      const double slack = (bound - q[t]) / std::max(bound, 1e-300);
      rep.worst_slack = std::min(rep.worst_slack, slack);
      ++rep.checks;
      if (slack < -1e-12) {
        ++rep.violations;
      }
    }
  }
  return rep;
}

RecursionReport recursion_monte_carlo(std::size_t draws, std::size_t max_tau, std::size_t steps,
                                std::uint64_t seed) {
  auto engine = make_engine(seed, "recursion-draws");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> tau(0, max_tau);
  RecursionReport total;
  total.worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < draws; ++i) {
    const double sum = 0.01 + 0.98 * unit(engine);
    const double split = unit(engine);
    const double z = unit(engine);
    const auto rep =
        recursion_check(sum * split, sum * (1.0 - split), z, tau(engine), 1, steps, engine());
    total.sequences += rep.sequences;
    total.checks += rep.checks;
    total.violations += rep.violations;
    total.worst_slack = std::min(total.worst_slack, rep.worst_slack);
  }
  return total;
}

std::vector<double> empirical_gap_curve(std::span<const RoundLog> logs, double initial_loss,
                                        double optimum_loss) {
  std::vector<double> gaps;
  gaps.reserve(logs.size() + 1);
  gaps.push_back(initial_loss - optimum_loss);
  for (const auto& r : logs) {
    gaps.push_back(r.loss - optimum_loss);
  }
  return gaps;
}

double envelope_coverage(std::span<const double> gaps, double rho_value, double delta_value,
                         std::size_t burn_in) {
  if (gaps.empty()) {
    return 0.0;
  }
  std::size_t counted = 0;
  std::size_t under = 0;
  for (std::size_t t = burn_in + 1; t < gaps.size(); ++t) {
    ++counted;
    if (gaps[t] <= envelope(rho_value, gaps[0], delta_value, static_cast<double>(t))) {
      ++under;
    }
  }
  return counted ? static_cast<double>(under) / static_cast<double>(counted) : 1.0;
}

double estimate_gradient_bound(std::span<const Dataset> shards, double l2, std::size_t probes,
                               double scale, std::uint64_t seed) {
  if (shards.empty()) {
    throw ValidationError("no shards to probe");
  }
  auto engine = make_engine(seed, "gradient-probe");
  std::normal_distribution<double> normal(0.0, scale);
  const auto shape = ModelShape::of(shards.front());
  double best = 0.0;
  ModelVector g;
  for (std::size_t p = 0; p < probes; ++p) {
    ModelVector w(shape.dim());
    for (auto& v : w) {
      v = normal(engine);
    }
    for (const auto& shard : shards) {
      loss_and_gradient(w, shard, l2, g);
      best = std::max(best, std::sqrt(kernels::squared_norm(g)));
    }
  }
  return best;
}

void to_json(nlohmann::json& j, const ConvergenceParams& p) {
  j = {{"mu", p.mu},   {"L", p.L},         {"gamma", p.gamma}, {"G", p.G},
       {"tau_max", p.tau_max}, {"psi", p.psi}, {"beta", p.beta}, {"emd", p.emd},
       {"c_max", p.c_max}};
}

void to_json(nlohmann::json& j, const RecursionReport& r) {
  j = {{"sequences", r.sequences},
       {"checks", r.checks},
       {"violations", r.violations},
       {"worst_slack", r.worst_slack}};
}

}  // namespace airfedga
