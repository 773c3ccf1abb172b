#include "airfedga/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "airfedga/error.hpp"

namespace airfedga {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlackTolerance = 1e-12;

struct Context {
  std::span<const WorkerProfile> profiles;
  double total = 0.0;
  std::vector<double> global_props;
  double upload = 0.0;
  double spread = 0.0;  // Delta l over all workers
  const ConvergenceInputs* conv = nullptr;
};

Context make_context(std::span<const WorkerProfile> profiles, const TimingConfig& timing,
                     const ConvergenceInputs& conv) {
  if (profiles.empty()) {
    throw ValidationError("grouping needs at least one worker");
  }
  Context c;
  c.profiles = profiles;
  c.upload = upload_time(timing);
  c.conv = &conv;
  const std::size_t K = profiles.front().class_sizes.size();
  c.global_props.assign(K, 0.0);
  double lo = kInf;
  double hi = -kInf;
  for (const auto& p : profiles) {
    if (p.class_sizes.size() != K) {
      throw ValidationError("workers disagree on the class count");
    }
    c.total += p.data_size;
    for (std::size_t k = 0; k < K; ++k) {
      c.global_props[k] += p.class_sizes[k];
    }
    lo = std::min(lo, p.latency);
    hi = std::max(hi, p.latency);
  }
  for (auto& v : c.global_props) {
    v /= c.total;
  }
  c.spread = hi - lo;
  return c;
}

// Running per-group sums, so a candidate placement costs O(K) to update.
struct Accum {
  std::vector<std::size_t> members;
  double data_size = 0.0;
  std::vector<double> class_sums;
  double max_latency = -kInf;
  double min_latency = kInf;
  double nominal_cost = 0.0;
};

double nominal_cost(const Context& c, const std::vector<std::size_t>& members, double group_size) {
  std::vector<double> gains(members.size(), 1.0);
  std::vector<double> sizes;
  std::vector<double> budgets;
  for (const auto i : members) {
    sizes.push_back(c.profiles[i].data_size);
    budgets.push_back(c.profiles[i].energy_budget);
  }
  return solve_power(c.conv->power, c.conv->model_norm, gains, sizes, budgets, group_size,
                     c.conv->noise_variance)
      .cost;
}

Accum with_member(const Context& c, const Accum& base, std::size_t i) {
  Accum a = base;
  const auto& p = c.profiles[i];
  a.members.push_back(i);
  a.data_size += p.data_size;
  if (a.class_sums.empty()) {
    a.class_sums.assign(p.class_sizes.size(), 0.0);
  }
  for (std::size_t k = 0; k < p.class_sizes.size(); ++k) {
    a.class_sums[k] += p.class_sizes[k];
  }
  a.max_latency = std::max(a.max_latency, p.latency);
  a.min_latency = std::min(a.min_latency, p.latency);
  a.nominal_cost = nominal_cost(c, a.members, a.data_size);
  return a;
}

bool feasible(const Context& c, const Accum& a, double xi) {
  return a.max_latency - a.min_latency <= xi * c.spread + kSlackTolerance;
}

double group_emd(const Context& c, const Accum& a) {
  double d = 0.0;
  for (std::size_t k = 0; k < c.global_props.size(); ++k) {
    d += std::abs(c.global_props[k] - a.class_sums[k] / a.data_size);
  }
  return d;
}

std::optional<RoundBound> try_bound(std::span<const double> psi, std::span<const double> beta,
                                    std::span<const double> emd, const ConvergenceInputs& conv,
                                    double c_max, double tau_max) {
  double weight = 0.0;
  double numer = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double pb = psi[j] * beta[j];
    weight += pb;
    numer += pb * (conv.gamma * conv.L * emd[j] * emd[j] * conv.G * conv.G +
                   conv.L * conv.L * c_max);
  }
  RoundBound r;
  r.B = 1.0 - (2.0 * conv.mu * conv.gamma - conv.mu / conv.L) * weight;
  const double denom = (2.0 * conv.mu * conv.gamma * conv.L - conv.mu) * weight;
  if (!(r.B > 0.0 && r.B < 1.0) || !(denom > 0.0)) {
    return std::nullopt;
  }
  r.delta = numer / denom;
  r.A = (conv.epsilon - r.delta) / conv.initial_gap;
  if (r.delta >= conv.epsilon) {
    r.T = kInf;
  } else if (r.A >= 1.0) {
    r.T = 0.0;
  } else {
    r.T = (1.0 + tau_max) * std::log(r.A) / std::log(r.B);
  }
  return r;
}

struct Objective {
  double value = kInf;
  double mean_round_time = 0.0;
  double staleness = 0.0;
  double c_max = 0.0;
  std::optional<RoundBound> bound;
  std::vector<double> completion, psi, beta, emd;
};

Objective objective(const Context& c, const std::vector<const Accum*>& groups) {
  Objective o;
  double inv_sum = 0.0;
  double l_max = 0.0;
  for (const auto* g : groups) {
    const double lj = g->max_latency + c.upload;
    o.completion.push_back(lj);
    o.beta.push_back(g->data_size / c.total);
    o.emd.push_back(group_emd(c, *g));
    o.c_max = std::max(o.c_max, g->nominal_cost);
    inv_sum += 1.0 / lj;
    l_max = std::max(l_max, lj);
  }
  for (const double lj : o.completion) {
    o.psi.push_back((1.0 / lj) / inv_sum);
  }
  o.mean_round_time = 1.0 / inv_sum;
  o.staleness = l_max * inv_sum;
  o.bound = try_bound(o.psi, o.beta, o.emd, *c.conv, o.c_max, o.staleness);
  if (o.bound && std::isfinite(o.bound->T)) {
    o.value = o.mean_round_time * o.bound->T;
  }
  return o;
}

GroupPlan build_plan(const Context& c, const std::vector<Accum>& accums) {
  std::vector<const Accum*> ptrs;
  for (const auto& a : accums) {
    ptrs.push_back(&a);
  }
  const auto o = objective(c, ptrs);
  GroupPlan plan;
  for (std::size_t j = 0; j < accums.size(); ++j) {
    GroupStats s;
    s.members = accums[j].members;
    std::sort(s.members.begin(), s.members.end());
    s.data_size = accums[j].data_size;
    s.beta = o.beta[j];
    s.class_props = accums[j].class_sums;
    for (auto& v : s.class_props) {
      v /= s.data_size;
    }
    s.emd = o.emd[j];
    s.completion = o.completion[j];
    s.psi = o.psi[j];
    s.nominal_cost = accums[j].nominal_cost;
    plan.groups.push_back(std::move(s));
  }
  plan.mean_round_time = o.mean_round_time;
  plan.staleness = o.staleness;
  plan.c_max = o.c_max;
  if (o.bound) {
    plan.bound = *o.bound;
  } else {
    plan.bound.T = kInf;
  }
  plan.objective = o.value;
  return plan;
}

std::vector<Accum> accumulate(const Context& c, const Groups& groups) {
  std::vector<Accum> accums;
  for (const auto& g : groups) {
    if (g.empty()) {
      throw ValidationError("plan contains an empty group");
    }
    Accum a;
    for (const auto i : g) {
      if (i >= c.profiles.size()) {
        throw ValidationError("plan references an unknown worker");
      }
      a = with_member(c, a, i);
    }
    accums.push_back(std::move(a));
  }
  return accums;
}

}  // namespace

double upload_time(const TimingConfig& cfg) {
  if (cfg.model_dim < 1 || cfg.subchannels < 1 || !(cfg.symbol_duration > 0.0)) {
    throw ConfigError("timing needs q >= 1, R >= 1 and a positive symbol duration");
  }
  return static_cast<double>(cfg.model_dim) / static_cast<double>(cfg.subchannels) *
         cfg.symbol_duration;
}

double group_completion(std::span<const std::size_t> group, std::span<const double> latencies,
                        double upload) {
  if (group.empty()) {
    throw ValidationError("group is empty");
  }
  double m = -kInf;
  for (const auto i : group) {
    m = std::max(m, latencies[i]);
  }
  return m + upload;
}

double mean_round_time(std::span<const double> completion) {
  double s = 0.0;
  for (const double l : completion) {
    s += 1.0 / l;
  }
  return 1.0 / s;
}

double staleness_estimate(std::span<const double> completion) {
  double s = 0.0;
  double m = 0.0;
  for (const double l : completion) {
    s += 1.0 / l;
    m = std::max(m, l);
  }
  return m * s;
}

std::vector<double> plan_psi(std::span<const double> completion) {
  double s = 0.0;
  for (const double l : completion) {
    s += 1.0 / l;
  }
  std::vector<double> psi;
  for (const double l : completion) {
    psi.push_back((1.0 / l) / s);
  }
  return psi;
}

RoundBound round_bound(std::span<const double> psi, std::span<const double> beta,
                       std::span<const double> emd, const ConvergenceInputs& conv, double c_max,
                       double tau_max) {
  if (psi.size() != beta.size() || psi.size() != emd.size()) {
    throw ValidationError("per-group vectors differ in length");
  }
  auto r = try_bound(psi, beta, emd, conv, c_max, tau_max);
  if (!r) {
    throw ConfigError("B lies outside (0, 1) or gamma <= 1/(2L); check mu, L and gamma");
  }
  return *r;
}

Groups GroupPlan::membership() const {
  Groups out;
  for (const auto& g : groups) {
    out.push_back(g.members);
  }
  return out;
}

double GroupPlan::average_emd() const {
  double s = 0.0;
  for (const auto& g : groups) {
    s += g.emd;
  }
  return groups.empty() ? 0.0 : s / static_cast<double>(groups.size());
}

bool is_feasible(const Groups& groups, std::span<const WorkerProfile> profiles, double xi) {
  double lo = kInf;
  double hi = -kInf;
  for (const auto& p : profiles) {
    lo = std::min(lo, p.latency);
    hi = std::max(hi, p.latency);
  }
  const double slack = xi * (hi - lo) + kSlackTolerance;
  for (const auto& g : groups) {
    if (g.empty()) {
      return false;
    }
    double gmax = -kInf;
    for (const auto i : g) {
      gmax = std::max(gmax, profiles[i].latency);
    }
    for (const auto i : g) {
      if (gmax - profiles[i].latency > slack) {
        return false;
      }
    }
  }
  return true;
}

bool is_partition(const Groups& groups, std::size_t num_workers) {
  std::vector<int> seen(num_workers, 0);
  for (const auto& g : groups) {
    for (const auto i : g) {
      if (i >= num_workers || seen[i]++) {
        return false;
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

GroupPlan evaluate_plan(const Groups& groups, std::span<const WorkerProfile> profiles,
                        const TimingConfig& timing, const ConvergenceInputs& conv) {
  const auto c = make_context(profiles, timing, conv);
  return build_plan(c, accumulate(c, groups));
}

GroupPlan greedy_group(std::span<const WorkerProfile> profiles, const TimingConfig& timing,
                       const ConvergenceInputs& conv) {
  const auto c = make_context(profiles, timing, conv);
  std::vector<std::size_t> order(profiles.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return profiles[a].data_size > profiles[b].data_size;
  });

  std::vector<Accum> groups;
  for (const auto i : order) {
    std::vector<const Accum*> view;
    for (const auto& g : groups) {
      view.push_back(&g);
    }
    view.push_back(nullptr);

    // Candidates are tried in index order with the fresh group last and only
    // a strictly smaller objective displaces the incumbent, so ties (including
    // all-infinite) go to the lowest feasible index.
    std::optional<std::size_t> best;
    double best_value = kInf;
    Accum best_accum;
    for (std::size_t j = 0; j <= groups.size(); ++j) {
      Accum cand = with_member(c, j < groups.size() ? groups[j] : Accum{}, i);
      if (!feasible(c, cand, timing.xi)) {
        continue;
      }
      auto trial = view;
      trial[j] = &cand;
      if (j < groups.size()) {
        trial.pop_back();
      }
      const double value = objective(c, trial).value;
      if (!best || value < best_value) {
        best_value = value;
        best = j;
        best_accum = std::move(cand);
      }
    }
    if (*best == groups.size()) {
      groups.push_back(std::move(best_accum));
    } else {
      groups[*best] = std::move(best_accum);
    }
  }
  return build_plan(c, groups);
}

GroupPlan exhaustive_group(std::span<const WorkerProfile> profiles, const TimingConfig& timing,
                           const ConvergenceInputs& conv) {
  const std::size_t n = profiles.size();
  if (n > 12) {
    throw ConfigError("exhaustive grouping is limited to 12 workers");
  }
  const auto c = make_context(profiles, timing, conv);
  // Restricted growth strings enumerate each set partition exactly once.
  std::vector<std::size_t> code(n, 0);
  std::vector<std::size_t> prefix_max(n, 0);
  auto advance = [&] {
    for (std::size_t i = n - 1; i >= 1; --i) {
      if (code[i] <= prefix_max[i - 1]) {
        ++code[i];
        prefix_max[i] = std::max(prefix_max[i - 1], code[i]);
        for (std::size_t r = i + 1; r < n; ++r) {
          code[r] = 0;
          prefix_max[r] = prefix_max[i];
        }
        return true;
      }
    }
    return false;
  };
  std::optional<GroupPlan> best;
  do {
    Groups groups(prefix_max[n - 1] + 1);
    for (std::size_t i = 0; i < n; ++i) {
      groups[code[i]].push_back(i);
    }
    if (is_feasible(groups, profiles, timing.xi)) {
      auto plan = build_plan(c, accumulate(c, groups));
      if (!best || plan.objective < best->objective) {
        best = std::move(plan);
      }
    }
  } while (advance());
  return *best;
}

GroupPlan tifl_group(std::span<const WorkerProfile> profiles, const TimingConfig& timing,
                     const ConvergenceInputs& conv, std::size_t bands) {
  if (bands < 1) {
    throw ConfigError("tier count must be at least 1");
  }
  const auto c = make_context(profiles, timing, conv);
  std::vector<std::size_t> order(profiles.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return profiles[a].latency < profiles[b].latency;
  });
  const double lo = profiles[order.front()].latency;
  const double width = c.spread / static_cast<double>(bands);
  const double slack = timing.xi * c.spread + kSlackTolerance;

  Groups groups;
  std::size_t current_band = static_cast<std::size_t>(-1);
  double first_latency = 0.0;
  for (const auto i : order) {
    const double l = profiles[i].latency;
    std::size_t band = 0;
    if (width > 0.0) {
      band = std::min(static_cast<std::size_t>((l - lo) / width), bands - 1);
    }
    if (groups.empty() || band != current_band || l - first_latency > slack) {
      groups.emplace_back();
      current_band = band;
      first_latency = l;
    }
    groups.back().push_back(i);
  }
  return build_plan(c, accumulate(c, groups));
}

GroupPlan single_group(std::span<const WorkerProfile> profiles, const TimingConfig& timing,
                       const ConvergenceInputs& conv) {
  Groups g(1);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    g[0].push_back(i);
  }
  return evaluate_plan(g, profiles, timing, conv);
}

GroupPlan singleton_groups(std::span<const WorkerProfile> profiles, const TimingConfig& timing,
                           const ConvergenceInputs& conv) {
  Groups g;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    g.push_back({i});
  }
  return evaluate_plan(g, profiles, timing, conv);
}

void to_json(nlohmann::json& j, const GroupPlan& plan) {
  auto finite_or_null = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : plan.groups) {
    groups.push_back({{"members", g.members},
                      {"data_size", g.data_size},
                      {"beta", g.beta},
                      {"class_props", g.class_props},
                      {"emd", g.emd},
                      {"completion", g.completion},
                      {"psi", g.psi},
                      {"nominal_cost", g.nominal_cost}});
  }
  j = {{"num_groups", plan.num_groups()},
       {"average_emd", plan.average_emd()},
       {"mean_round_time", plan.mean_round_time},
       {"staleness_estimate", plan.staleness},
       {"c_max", plan.c_max},
       {"A", finite_or_null(plan.bound.A)},
       {"B", finite_or_null(plan.bound.B)},
       {"delta", finite_or_null(plan.bound.delta)},
       {"T", finite_or_null(plan.bound.T)},
       {"objective", finite_or_null(plan.objective)},
       {"groups", std::move(groups)}};
}

}  // namespace airfedga
