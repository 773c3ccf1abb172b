#include "airfedga/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "airfedga/channel.hpp"
#include "airfedga/error.hpp"
#include "airfedga/kernels.hpp"
#include "airfedga/rng.hpp"

namespace airfedga {
namespace {

enum class Transport { OverTheAir, Orthogonal };

void check_limits(const SimConfig& cfg) {
  if (!(cfg.horizon > 0.0) && cfg.max_rounds == 0) {
    throw ConfigError("simulation needs a positive horizon or a round budget");
  }
  if (!(cfg.upload_time > 0.0)) {
    throw ConfigError("upload time must be positive");
  }
}

bool past_limits(const SimConfig& cfg, double end, std::size_t rounds_done) {
  return (cfg.horizon > 0.0 && end > cfg.horizon) ||
         (cfg.max_rounds > 0 && rounds_done >= cfg.max_rounds);
}

ModelVector initial_model(const Environment& env, const SimConfig& cfg) {
  if (cfg.initial_model.empty()) {
    return zero_model(env.shape());
  }
  if (cfg.initial_model.size() != env.shape().dim()) {
    throw ValidationError("initial model has the wrong dimension");
  }
  return cfg.initial_model;
}

struct Aggregate {
  ModelVector model;
  double sigma = 0.0;
  double eta = 0.0;
  double cost = 0.0;
  std::size_t iterations = 0;
  std::vector<double> energies;
};

Aggregate over_the_air(const Environment& env, const SimConfig& cfg, const ModelVector& w_prev,
                       std::span<const std::size_t> members,
                       std::span<const ModelVector> locals, double total, std::size_t round) {
  std::vector<double> sizes, budgets;
  double group_size = 0.0;
  double norm = 0.0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    const auto& p = env.profiles[members[m]];
    sizes.push_back(p.data_size);
    budgets.push_back(p.energy_budget);
    group_size += p.data_size;
    norm = std::max(norm, std::sqrt(kernels::squared_norm(locals[m])));
  }
  norm = std::max(norm, 1e-12);

  auto engine = make_engine(cfg.channel_seed, "channel", round);
  const auto draw = draw_channel(engine, members.size(), w_prev.size(), cfg.noise_variance);
  const auto power =
      solve_power(cfg.power, norm, draw.gains, sizes, budgets, group_size, cfg.noise_variance);

  auto rx = receive(locals, sizes, power.sigma, draw);
  Aggregate a;
  a.model = estimate_global(w_prev, rx.signal, sizes, total, power.eta);
  a.sigma = power.sigma;
  a.eta = power.eta;
  a.cost = c_cost(power.sigma, power.eta, norm, group_size, cfg.noise_variance);
  a.iterations = power.iterations;
  a.energies = std::move(rx.energies);
  return a;
}

Aggregate orthogonal(const Environment& env, const ModelVector& w_prev,
                     std::span<const std::size_t> members, std::span<const ModelVector> locals,
                     double total) {
  std::vector<double> sizes;
  for (const auto i : members) {
    sizes.push_back(env.profiles[i].data_size);
  }
  Aggregate a;
  a.model = error_free_aggregate(w_prev, locals, sizes, total);
  return a;
}

void finish_round(const Environment& env, const SimConfig& cfg, Aggregate& agg, RoundLog& log,
                  std::vector<RoundLog>& logs) {
  if (!all_finite(agg.model)) {
    throw DomainError("global model became non-finite at round " + std::to_string(log.round));
  }
  log.sigma = agg.sigma;
  log.eta = agg.eta;
  log.cost = agg.cost;
  log.power_iterations = agg.iterations;
  log.energies = std::move(agg.energies);
  const double prev = logs.empty() ? 0.0 : logs.back().cumulative_energy;
  log.cumulative_energy = prev + log.event_energy();
  log.loss = loss(agg.model, env.train, cfg.learner.l2);
  log.accuracy = accuracy(agg.model, env.test);
  if (cfg.observer) {
    cfg.observer(log, agg.model);
  }
  logs.push_back(log);
}

std::vector<RoundLog> run_grouped(const Environment& env, const Groups& groups,
                                  Transport transport, const SimConfig& cfg) {
  check_limits(cfg);
  const std::size_t N = env.profiles.size();
  if (!is_partition(groups, N)) {
    throw ValidationError("group plan is not a partition of the workers");
  }
  const double total = static_cast<double>(env.partition.total);
  const std::size_t M = groups.size();

  ModelVector w = initial_model(env, cfg);
  std::vector<ModelVector> received(M, w);
  std::vector<std::size_t> version(M, 0);
  std::vector<double> slowest(M, 0.0), ready(M, 0.0), upload(M, 0.0);
  for (std::size_t j = 0; j < M; ++j) {
    for (const auto i : groups[j]) {
      slowest[j] = std::max(slowest[j], env.profiles[i].latency);
    }
    ready[j] = slowest[j];
    upload[j] = transport == Transport::OverTheAir
                    ? cfg.upload_time
                    : cfg.upload_time * static_cast<double>(groups[j].size());
  }

  std::vector<RoundLog> logs;
  double channel_free = 0.0;
  std::vector<ModelVector> locals;
  while (true) {
    std::size_t j = 0;
    for (std::size_t g = 1; g < M; ++g) {
      if (ready[g] < ready[j]) {
        j = g;
      }
    }
    const double end = std::max(ready[j], channel_free) + upload[j];
    if (past_limits(cfg, end, logs.size())) {
      break;
    }
    const std::size_t t = logs.size() + 1;

    locals.clear();
    for (const auto i : groups[j]) {
      locals.push_back(local_update(received[j], env.shards[i], cfg.learner));
    }
    auto agg = transport == Transport::OverTheAir
                   ? over_the_air(env, cfg, w, groups[j], locals, total, t)
                   : orthogonal(env, w, groups[j], locals, total);

    RoundLog log;
    log.round = t;
    log.time = end;
    log.group = static_cast<int>(j);
    log.staleness = t - 1 - version[j];
    log.participants = groups[j];
    w = agg.model;
    finish_round(env, cfg, agg, log, logs);

    received[j] = w;
    version[j] = t;
    ready[j] = end + slowest[j];
    channel_free = end;
  }
  return logs;
}

Groups whole(std::size_t n) {
  Groups g(1);
  g[0].resize(n);
  std::iota(g[0].begin(), g[0].end(), 0);
  return g;
}

}  // namespace

std::string_view mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::AirFedGA:
      return "airfedga";
    case Mechanism::FedAvg:
      return "fedavg";
    case Mechanism::AirFedAvg:
      return "air_fedavg";
    case Mechanism::Dynamic:
      return "dynamic";
    case Mechanism::TiFL:
      return "tifl";
  }
  return "unknown";
}

Mechanism parse_mechanism(std::string_view name) {
  for (const auto m : {Mechanism::AirFedGA, Mechanism::FedAvg, Mechanism::AirFedAvg,
                       Mechanism::Dynamic, Mechanism::TiFL}) {
    if (mechanism_name(m) == name) {
      return m;
    }
  }
  throw ConfigError("unknown mechanism '" + std::string(name) + "'");
}

double RoundLog::event_energy() const { return std::accumulate(energies.begin(), energies.end(), 0.0); }

Environment make_environment(Dataset train, Dataset test, Partition partition,
                             std::vector<WorkerProfile> profiles) {
  if (partition.num_workers() != profiles.size()) {
    throw ValidationError("partition and profiles disagree on the worker count");
  }
  if (test.empty()) {
    throw ValidationError("test set is empty");
  }
  Environment env;
  env.shards.reserve(partition.num_workers());
  for (const auto& idx : partition.assignments) {
    env.shards.push_back(train.subset(idx));
  }
  env.train = std::move(train);
  env.test = std::move(test);
  env.partition = std::move(partition);
  env.profiles = std::move(profiles);
  return env;
}

std::vector<RoundLog> run_airfedga(const Environment& env, const GroupPlan& plan,
                                   const SimConfig& cfg) {
  return run_grouped(env, plan.membership(), Transport::OverTheAir, cfg);
}

std::vector<RoundLog> run_tifl(const Environment& env, const GroupPlan& plan,
                               const SimConfig& cfg) {
  return run_grouped(env, plan.membership(), Transport::Orthogonal, cfg);
}

std::vector<RoundLog> run_fedavg(const Environment& env, const SimConfig& cfg) {
  return run_grouped(env, whole(env.profiles.size()), Transport::Orthogonal, cfg);
}

std::vector<RoundLog> run_air_fedavg(const Environment& env, const SimConfig& cfg) {
  return run_grouped(env, whole(env.profiles.size()), Transport::OverTheAir, cfg);
}

std::vector<RoundLog> run_dynamic(const Environment& env, double fraction, const SimConfig& cfg) {
  check_limits(cfg);
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("dynamic fraction must lie in (0, 1]");
  }
  const std::size_t N = env.profiles.size();
  const auto k = static_cast<std::size_t>(
      std::clamp(std::ceil(fraction * static_cast<double>(N) - 1e-9), 1.0,
                 static_cast<double>(N)));

  // Synchronous: every worker starts from the current global model, the k
  // earliest finishers are aggregated and the rest are dropped for the round.
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return env.profiles[a].latency < env.profiles[b].latency;
  });
  std::vector<std::size_t> selected(order.begin(), order.begin() + static_cast<long>(k));
  std::sort(selected.begin(), selected.end());
  double round_latency = 0.0;
  double selected_size = 0.0;
  for (const auto i : selected) {
    round_latency = std::max(round_latency, env.profiles[i].latency);
    selected_size += env.profiles[i].data_size;
  }

  ModelVector w = initial_model(env, cfg);
  std::vector<RoundLog> logs;
  std::vector<ModelVector> locals;
  double previous_end = 0.0;
  while (true) {
    const double end = previous_end + round_latency + cfg.upload_time;
    if (past_limits(cfg, end, logs.size())) {
      break;
    }
    const std::size_t t = logs.size() + 1;
    locals.clear();
    for (const auto i : selected) {
      locals.push_back(local_update(w, env.shards[i], cfg.learner));
    }
    auto agg = over_the_air(env, cfg, w, selected, locals, selected_size, t);

    RoundLog log;
    log.round = t;
    log.time = end;
    log.group = 0;
    log.staleness = 0;
    log.participants = selected;
    w = agg.model;
    finish_round(env, cfg, agg, log, logs);
    previous_end = end;
  }
  return logs;
}

}  // namespace airfedga
