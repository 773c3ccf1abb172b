#include "airfedga/experiment.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "airfedga/bounds.hpp"
#include "airfedga/error.hpp"
#include "airfedga/rng.hpp"

namespace airfedga {
namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write '" + path.string() + "'");
  }
  out << text;
}

GroupPlan make_plan(const Prepared& p, GroupingMethod method) {
  const auto& profiles = p.env.profiles;
  switch (method) {
    case GroupingMethod::Greedy:
      return greedy_group(profiles, p.timing, p.conv);
    case GroupingMethod::TiFL:
      return tifl_group(profiles, p.timing, p.conv, p.cfg.tifl_bands);
    case GroupingMethod::Single:
      return single_group(profiles, p.timing, p.conv);
    case GroupingMethod::Singleton:
      return singleton_groups(profiles, p.timing, p.conv);
  }
  throw ConfigError("unknown grouping method");
}

nlohmann::json bound_report(const Prepared& p, const GroupPlan& plan,
                            const std::vector<RoundLog>& logs) {
  double tau = 0.0;
  double c_max = 0.0;
  for (const auto& r : logs) {
    tau = std::max(tau, static_cast<double>(r.staleness));
    c_max = std::max(c_max, r.cost);
  }
  const auto params =
      params_from_plan(plan, p.conv.mu, p.conv.L, p.conv.gamma, p.conv.G, tau, c_max);
  nlohmann::json j = {{"params", params}};
  try {
    j["rho"] = rho(params);
    j["delta"] = delta(params);
  } catch (const DomainError& e) {
    j["rho"] = nullptr;
    j["delta"] = nullptr;
    j["note"] = e.what();
  }
  return j;
}

}  // namespace

SimConfig Prepared::sim_config() const {
  SimConfig s;
  s.learner.learning_rate = conv.gamma;
  s.learner.l2 = cfg.l2;
  s.noise_variance = cfg.noise_variance;
  s.power.theta = cfg.theta;
  s.power.max_iterations = cfg.max_iterations;
  s.upload_time = upload;
  s.horizon = cfg.horizon;
  s.max_rounds = cfg.max_rounds;
  s.channel_seed = substream_seed(cfg.seed, "channel");
  return s;
}

Prepared prepare(const ExperimentConfig& cfg) {
  validate(cfg);
  Prepared p;
  p.cfg = cfg;

  const auto data_seed = substream_seed(cfg.seed, "data");
  auto train = generate_synthetic(data_seed, cfg.classes, cfg.features,
                                  cfg.workers * cfg.samples_per_worker, cfg.separation);
  auto test =
      generate_holdout(data_seed, cfg.classes, cfg.features, cfg.test_samples, cfg.separation);
  scale_features(train, cfg.feature_spread);
  scale_features(test, cfg.feature_spread);
  std::optional<std::uint64_t> jitter;
  if (cfg.size_jitter) {
    jitter = substream_seed(cfg.seed, "partition");
  }
  auto partition = partition_label_skew(train, cfg.workers, cfg.classes_per_worker, jitter);

  ProfileOptions opts;
  opts.base_latency = cfg.base_latency;
  opts.kappa_min = cfg.kappa_min;
  opts.kappa_max = cfg.kappa_max;
  opts.energy_budget = cfg.energy_budget;
  auto latency_engine = make_engine(cfg.seed, "latency");
  auto profiles = make_profiles(partition, opts, latency_engine);

  p.env = make_environment(std::move(train), std::move(test), std::move(partition),
                           std::move(profiles));

  p.timing.model_dim = cfg.model_dim();
  p.timing.subchannels = cfg.subchannels;
  p.timing.symbol_duration = cfg.symbol_duration;
  p.timing.xi = cfg.xi;
  p.upload = upload_time(p.timing);

  p.smoothness = smoothness_estimate(p.env.train, cfg.l2);
  p.conv.L = p.smoothness;
  p.conv.gamma = cfg.learning_rate.value_or(0.75 / p.smoothness);
  p.conv.mu = cfg.grouping_mu.value_or(cfg.l2 > 0.0 ? cfg.l2 : 0.1 * p.smoothness);
  p.conv.initial_gap =
      cfg.initial_gap.value_or(std::log(static_cast<double>(cfg.classes)) - 0.05);
  p.conv.epsilon = cfg.epsilon.value_or(p.conv.initial_gap);
  p.conv.G = cfg.gradient_bound
                 ? *cfg.gradient_bound
                 : estimate_gradient_bound(p.env.shards, cfg.l2, 8, 1.0,
                                           substream_seed(cfg.seed, "probe"));
  p.conv.model_norm = cfg.model_norm;
  p.conv.noise_variance = cfg.noise_variance;
  p.conv.power.theta = cfg.theta;
  p.conv.power.max_iterations = cfg.max_iterations;

  p.plan = make_plan(p, cfg.grouping);
  p.tifl_plan = make_plan(p, GroupingMethod::TiFL);
  return p;
}

MechanismRun run_mechanism(const Prepared& prep, Mechanism m) {
  const auto sim = prep.sim_config();
  MechanismRun r;
  r.mechanism = m;
  switch (m) {
    case Mechanism::AirFedGA:
      r.logs = run_airfedga(prep.env, prep.plan, sim);
      break;
    case Mechanism::FedAvg:
      r.logs = run_fedavg(prep.env, sim);
      break;
    case Mechanism::AirFedAvg:
      r.logs = run_air_fedavg(prep.env, sim);
      break;
    case Mechanism::Dynamic:
      r.logs = run_dynamic(prep.env, prep.cfg.fraction, sim);
      break;
    case Mechanism::TiFL:
      r.logs = run_tifl(prep.env, prep.tifl_plan, sim);
      break;
  }
  r.summary = summarize(std::string(mechanism_name(m)), r.logs, prep.cfg.thresholds);
  return r;
}

std::vector<MechanismRun> run_all(const Prepared& prep) {
  std::vector<MechanismRun> runs;
  for (const auto m : prep.cfg.mechanisms) {
    runs.push_back(run_mechanism(prep, m));
  }
  return runs;
}

nlohmann::json manifest(const Prepared& prep, const std::vector<MechanismRun>& runs) {
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [k, v] : config_echo(prep.cfg)) {
    config[k] = v;
  }
  nlohmann::json workers = nlohmann::json::array();
  for (const auto& w : prep.env.profiles) {
    workers.push_back({{"id", w.id},
                       {"data_size", w.data_size},
                       {"kappa", w.kappa},
                       {"latency", w.latency},
                       {"energy_budget", w.energy_budget}});
  }
  const auto initial = zero_model(prep.env.shape());
  nlohmann::json j = {
      {"config", std::move(config)},
      {"config_hash", config_hash(prep.cfg)},
      {"derived",
       {{"model_dim", prep.cfg.model_dim()},
        {"upload_time", prep.upload},
        {"smoothness", prep.smoothness},
        {"learning_rate", prep.conv.gamma},
        {"grouping_mu", prep.conv.mu},
        {"gradient_bound", prep.conv.G},
        {"epsilon", prep.conv.epsilon},
        {"initial_gap", prep.conv.initial_gap},
        {"initial_loss", loss(initial, prep.env.train, prep.cfg.l2)}}},
      {"workers", std::move(workers)},
      {"plan", prep.plan},
      {"tifl_plan", prep.tifl_plan}};
  nlohmann::json results = nlohmann::json::object();
  for (const auto& r : runs) {
    nlohmann::json entry = {{"summary", r.summary}};
    if (r.mechanism == Mechanism::AirFedGA) {
      entry["bounds"] = bound_report(prep, prep.plan, r.logs);
    }
    results[std::string(mechanism_name(r.mechanism))] = std::move(entry);
  }
  j["results"] = std::move(results);
  return j;
}

fs::path run_directory(const fs::path& base, const ExperimentConfig& cfg) {
  return base / (config_hash(cfg) + "-seed" + std::to_string(cfg.seed));
}

void write_outputs(const fs::path& dir, const Prepared& prep,
                   const std::vector<MechanismRun>& runs) {
  fs::create_directories(dir);
  write_text(dir / "manifest.json", manifest(prep, runs).dump(2) + "\n");
  nlohmann::json summaries = nlohmann::json::array();
  for (const auto& r : runs) {
    summaries.push_back(r.summary);
    std::ofstream csv(dir / (std::string(mechanism_name(r.mechanism)) + ".csv"),
                      std::ios::binary);
    if (!csv) {
      throw Error("cannot write round log in '" + dir.string() + "'");
    }
    write_round_csv(csv, r.logs);
  }
  write_text(dir / "summary.json", summaries.dump(2) + "\n");
}

RunResult run_experiment(const ExperimentConfig& cfg, const fs::path& base) {
  const auto prep = prepare(cfg);
  RunResult result;
  result.runs = run_all(prep);
  result.directory = run_directory(base, cfg);
  write_outputs(result.directory, prep, result.runs);
  return result;
}

fs::path run_sweep(const ExperimentConfig& cfg, const std::string& axis,
                   const std::vector<std::string>& values, const fs::path& base,
                   std::size_t jobs) {
  if (values.empty()) {
    throw ConfigError("sweep over '" + axis + "' needs at least one value");
  }
  std::vector<ExperimentConfig> points;
  for (const auto& v : values) {
    auto c = cfg;
    set_config_value(c, axis, v);
    validate(c);
    points.push_back(std::move(c));
  }
  std::string tag = axis;
  for (auto& ch : tag) {
    if (ch == '.') {
      ch = '_';
    }
  }
  const fs::path dir = base / ("sweep-" + tag + "-" + config_hash(cfg) + "-seed" +
                               std::to_string(cfg.seed));
  fs::create_directories(dir);

  std::vector<RunResult> results(points.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        results[i] = run_experiment(points[i], dir);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(jobs, points.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }

  std::vector<ComparisonRow> rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (const auto& r : results[i].runs) {
      rows.push_back({results[i].directory.filename().string(), axis, values[i], points[i].seed,
                      r.summary});
    }
  }
  std::ofstream csv(dir / "comparison.csv", std::ios::binary);
  write_comparison_csv(csv, rows);
  return dir;
}

}  // namespace airfedga
