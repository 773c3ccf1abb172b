#include "airfedga/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "airfedga/error.hpp"
#include "airfedga/metrics.hpp"
#include "airfedga/rng.hpp"

namespace airfedga {
namespace {

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct KeyEntry {
  ConfigKey key;
  Setter set;
  Getter get;
};

double to_double(const std::string& v) { return parse_double(v); }

std::size_t to_size(const std::string& v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ValidationError("not an unsigned integer: '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") {
    return true;
  }
  if (v == "false" || v == "0" || v == "no" || v == "off") {
    return false;
  }
  throw ValidationError("not a boolean: '" + v + "'");
}

std::optional<double> to_auto_double(const std::string& v) {
  if (v == "auto") {
    return std::nullopt;
  }
  return to_double(v);
}

std::string auto_text(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("auto");
}

std::string size_text(std::size_t v) { return std::to_string(v); }

KeyEntry real(std::string name, double ExperimentConfig::*field) {
  return {{std::move(name), false},
          [field](ExperimentConfig& c, const std::string& v) { c.*field = to_double(v); },
          [field](const ExperimentConfig& c) { return format_double(c.*field); }};
}

KeyEntry count(std::string name, std::size_t ExperimentConfig::*field) {
  return {{std::move(name), false},
          [field](ExperimentConfig& c, const std::string& v) { c.*field = to_size(v); },
          [field](const ExperimentConfig& c) { return size_text(c.*field); }};
}

KeyEntry optional_real(std::string name, std::optional<double> ExperimentConfig::*field) {
  return {{std::move(name), false},
          [field](ExperimentConfig& c, const std::string& v) { c.*field = to_auto_double(v); },
          [field](const ExperimentConfig& c) { return auto_text(c.*field); }};
}

const std::vector<KeyEntry>& table() {
  static const std::vector<KeyEntry> entries = [] {
    std::vector<KeyEntry> t;
    t.push_back({{"run.seed", true},
                 [](ExperimentConfig& c, const std::string& v) {
                   std::uint64_t s = 0;
                   const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
                   if (ec != std::errc() || ptr != v.data() + v.size()) {
                     throw ValidationError("not an unsigned integer: '" + v + "'");
                   }
                   c.seed = s;
                 },
                 [](const ExperimentConfig& c) { return std::to_string(c.seed); }});
    t.push_back({{"run.mechanism", true},
                 [](ExperimentConfig& c, const std::string& v) {
                   c.mechanisms.clear();
                   if (v == "all") {
                     c.mechanisms = {Mechanism::AirFedGA, Mechanism::FedAvg, Mechanism::AirFedAvg,
                                     Mechanism::Dynamic, Mechanism::TiFL};
                     return;
                   }
                   std::stringstream ss(v);
                   std::string item;
                   while (std::getline(ss, item, ',')) {
                     boost::algorithm::trim(item);
                     const auto m = parse_mechanism(item);
                     if (std::find(c.mechanisms.begin(), c.mechanisms.end(), m) ==
                         c.mechanisms.end()) {
                       c.mechanisms.push_back(m);
                     }
                   }
                   if (c.mechanisms.empty()) {
                     throw ValidationError("no mechanism given");
                   }
                 },
                 [](const ExperimentConfig& c) {
                   std::string out;
                   for (const auto m : c.mechanisms) {
                     out += (out.empty() ? "" : ",") + std::string(mechanism_name(m));
                   }
                   return out;
                 }});
    t.push_back(real("run.horizon", &ExperimentConfig::horizon));
    t.push_back(count("run.max_rounds", &ExperimentConfig::max_rounds));

    t.push_back(count("data.workers", &ExperimentConfig::workers));
    t.push_back(count("data.classes", &ExperimentConfig::classes));
    t.push_back(count("data.features", &ExperimentConfig::features));
    t.push_back(count("data.samples_per_worker", &ExperimentConfig::samples_per_worker));
    t.push_back(count("data.test_samples", &ExperimentConfig::test_samples));
    t.push_back(real("data.separation", &ExperimentConfig::separation));
    t.push_back(real("data.feature_spread", &ExperimentConfig::feature_spread));
    t.push_back(count("data.classes_per_worker", &ExperimentConfig::classes_per_worker));
    t.push_back({{"data.size_jitter", false},
                 [](ExperimentConfig& c, const std::string& v) { c.size_jitter = to_bool(v); },
                 [](const ExperimentConfig& c) {
                   return std::string(c.size_jitter ? "true" : "false");
                 }});

    t.push_back(real("timing.base_latency", &ExperimentConfig::base_latency));
    t.push_back(real("timing.kappa_min", &ExperimentConfig::kappa_min));
    t.push_back(real("timing.kappa_max", &ExperimentConfig::kappa_max));
    t.push_back(count("timing.subchannels", &ExperimentConfig::subchannels));
    t.push_back(real("timing.symbol_duration", &ExperimentConfig::symbol_duration));
    t.push_back(real("timing.xi", &ExperimentConfig::xi));

    t.push_back(real("channel.noise_variance", &ExperimentConfig::noise_variance));
    t.push_back(real("channel.energy_budget", &ExperimentConfig::energy_budget));

    t.push_back(optional_real("learner.learning_rate", &ExperimentConfig::learning_rate));
    t.push_back(real("learner.l2", &ExperimentConfig::l2));

    t.push_back(real("power.theta", &ExperimentConfig::theta));
    t.push_back(count("power.max_iterations", &ExperimentConfig::max_iterations));

    t.push_back({{"grouping.method", false},
                 [](ExperimentConfig& c, const std::string& v) {
                   for (const auto g : {GroupingMethod::Greedy, GroupingMethod::TiFL,
                                        GroupingMethod::Single, GroupingMethod::Singleton}) {
                     if (grouping_name(g) == v) {
                       c.grouping = g;
                       return;
                     }
                   }
                   throw ValidationError("unknown grouping method '" + v + "'");
                 },
                 [](const ExperimentConfig& c) { return std::string(grouping_name(c.grouping)); }});
    t.push_back(count("grouping.tifl_bands", &ExperimentConfig::tifl_bands));
    t.push_back(optional_real("grouping.mu", &ExperimentConfig::grouping_mu));
    t.push_back(optional_real("grouping.epsilon", &ExperimentConfig::epsilon));
    t.push_back(optional_real("grouping.initial_gap", &ExperimentConfig::initial_gap));
    t.push_back(optional_real("grouping.gradient_bound", &ExperimentConfig::gradient_bound));
    t.push_back(real("grouping.model_norm", &ExperimentConfig::model_norm));

    t.push_back(real("dynamic.fraction", &ExperimentConfig::fraction));

    t.push_back({{"metrics.thresholds", false},
                 [](ExperimentConfig& c, const std::string& v) {
                   c.thresholds.clear();
                   std::stringstream ss(v);
                   std::string item;
                   while (std::getline(ss, item, ',')) {
                     boost::algorithm::trim(item);
                     c.thresholds.push_back(to_double(item));
                   }
                 },
                 [](const ExperimentConfig& c) {
                   std::string out;
                   for (const double v : c.thresholds) {
                     out += (out.empty() ? "" : ",") + format_double(v);
                   }
                   return out;
                 }});
    return t;
  }();
  return entries;
}

const KeyEntry& find_key(std::string_view key) {
  for (const auto& e : table()) {
    if (e.key.name == key) {
      return e;
    }
  }
  throw ConfigError("unknown key '" + std::string(key) + "'");
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) {
    throw ConfigError("invalid value for '" + key + "': " + what);
  }
}

}  // namespace

std::string_view grouping_name(GroupingMethod g) {
  switch (g) {
    case GroupingMethod::Greedy:
      return "greedy";
    case GroupingMethod::TiFL:
      return "tifl";
    case GroupingMethod::Single:
      return "single";
    case GroupingMethod::Singleton:
      return "singleton";
  }
  return "unknown";
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& e : table()) {
      k.push_back(e.key);
    }
    return k;
  }();
  return keys;
}

void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  const auto& entry = find_key(key);
  std::string v(value);
  boost::algorithm::trim(v);
  try {
    entry.set(cfg, v);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("invalid value for '" + entry.key.name + "': " + e.what());
  }
}

std::string get_config_value(const ExperimentConfig& cfg, std::string_view key) {
  return find_key(key).get(cfg);
}

ExperimentConfig parse_config(std::string_view text) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.message() + " at line " +
                      std::to_string(e.line()));
  }
  ExperimentConfig cfg;
  std::map<std::string, bool> seen;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError("key '" + section + "' must be inside a [section]");
    }
    for (const auto& [name, node] : body) {
      const std::string key = section + "." + name;
      set_config_value(cfg, key, node.data());
      seen[key] = true;
    }
  }
  for (const auto& e : table()) {
    if (e.key.required && !seen.count(e.key.name)) {
      throw ConfigError("missing required key '" + e.key.name + "'");
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file '" + path.string() + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : table()) {
    out.emplace_back(e.key.name, e.get(cfg));
  }
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = fnv1a64("");
  for (const auto& [k, v] : config_echo(cfg)) {
    if (k == "run.seed") {
      continue;
    }
    h = fnv1a64(k, h);
    h = fnv1a64("=", h);
    h = fnv1a64(v, h);
    h = fnv1a64("\n", h);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate(const ExperimentConfig& cfg) {
  require(!cfg.mechanisms.empty(), "run.mechanism", "at least one mechanism");
  require(cfg.horizon > 0.0 || cfg.max_rounds > 0, "run.horizon",
          "needs a positive horizon or run.max_rounds");
  require(cfg.horizon >= 0.0, "run.horizon", "must be non-negative");
  require(cfg.workers >= 1, "data.workers", "must be at least 1");
  require(cfg.classes >= 2, "data.classes", "must be at least 2");
  require(cfg.features >= 1, "data.features", "must be at least 1");
  require(cfg.samples_per_worker >= 1, "data.samples_per_worker", "must be at least 1");
  require(cfg.workers * cfg.samples_per_worker >= cfg.classes, "data.samples_per_worker",
          "total samples must cover every class");
  require(cfg.test_samples >= cfg.classes, "data.test_samples", "must cover every class");
  require(cfg.separation >= 0.0, "data.separation", "must be non-negative");
  require(cfg.feature_spread >= 1.0 && std::isfinite(cfg.feature_spread), "data.feature_spread",
          "must be finite and at least 1");
  require(cfg.classes_per_worker >= 1 && cfg.classes_per_worker <= cfg.classes,
          "data.classes_per_worker", "must lie in [1, data.classes]");
  require(cfg.base_latency > 0.0, "timing.base_latency", "must be positive");
  require(cfg.kappa_min >= 1.0, "timing.kappa_min", "must be at least 1");
  require(cfg.kappa_max >= cfg.kappa_min, "timing.kappa_max", "must be at least kappa_min");
  require(cfg.subchannels >= 1, "timing.subchannels", "must be at least 1");
  require(cfg.symbol_duration > 0.0, "timing.symbol_duration", "must be positive");
  require(cfg.xi >= 0.0, "timing.xi", "must be non-negative");
  require(cfg.noise_variance >= 0.0, "channel.noise_variance", "must be non-negative");
  require(cfg.energy_budget > 0.0, "channel.energy_budget", "must be positive");
  require(!cfg.learning_rate || *cfg.learning_rate > 0.0, "learner.learning_rate",
          "must be positive");
  require(cfg.l2 >= 0.0, "learner.l2", "must be non-negative");
  require(cfg.theta > 0.0 && cfg.theta < 1.0, "power.theta", "must lie in (0, 1)");
  require(cfg.max_iterations >= 1, "power.max_iterations", "must be at least 1");
  require(cfg.tifl_bands >= 1, "grouping.tifl_bands", "must be at least 1");
  require(!cfg.grouping_mu || *cfg.grouping_mu > 0.0, "grouping.mu", "must be positive");
  require(!cfg.epsilon || *cfg.epsilon > 0.0, "grouping.epsilon", "must be positive");
  require(!cfg.initial_gap || *cfg.initial_gap > 0.0, "grouping.initial_gap",
          "must be positive");
  require(!cfg.gradient_bound || *cfg.gradient_bound >= 0.0, "grouping.gradient_bound",
          "must be non-negative");
  require(cfg.model_norm > 0.0, "grouping.model_norm", "must be positive");
  require(cfg.fraction > 0.0 && cfg.fraction <= 1.0, "dynamic.fraction", "must lie in (0, 1]");
  for (const double t : cfg.thresholds) {
    require(t >= 0.0 && t <= 1.0, "metrics.thresholds", "each threshold must lie in [0, 1]");
  }
}

}  // namespace airfedga
