#include "airfedga/metrics.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "airfedga/error.hpp"

namespace airfedga {
namespace {

constexpr const char* kRoundHeader[] = {
    "round",  "time",        "group",    "staleness",    "sigma",
    "eta",    "cost",        "power_iterations", "participants", "energies",
    "loss",   "accuracy",    "cumulative_energy"};
constexpr std::size_t kRoundColumns = std::size(kRoundHeader);

std::string join(const auto& values, auto&& format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) {
      out += ';';
    }
    out += format(values[i]);
  }
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  if (text.empty()) {
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

std::size_t parse_size(std::string_view text) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError("not an unsigned integer: '" + std::string(text) + "'");
  }
  return v;
}

std::string optional_text(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

std::optional<std::size_t> stable_crossing(std::span<const RoundLog> logs, double threshold) {
  const std::size_t n = logs.size();
  std::vector<double> suffix_min(n + 1, std::numeric_limits<double>::infinity());
  for (std::size_t i = n; i-- > 0;) {
    suffix_min[i] = std::min(suffix_min[i + 1], logs[i].accuracy);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (logs[i].accuracy >= threshold && suffix_min[i + 1] >= threshold - kStabilityMargin) {
      return i;
    }
  }
  return std::nullopt;
}

std::optional<double> time_to_accuracy(std::span<const RoundLog> logs, double threshold) {
  const auto i = stable_crossing(logs, threshold);
  return i ? std::optional<double>(logs[*i].time) : std::nullopt;
}

std::optional<double> energy_to_accuracy(std::span<const RoundLog> logs, double threshold) {
  const auto i = stable_crossing(logs, threshold);
  return i ? std::optional<double>(logs[*i].cumulative_energy) : std::nullopt;
}

double jitter(std::span<const double> losses) {
  if (losses.size() < 2) {
    return 0.0;
  }
  const std::size_t n = losses.size() - 1;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean += losses[i + 1] - losses[i];
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = losses[i + 1] - losses[i] - mean;
    var += d * d;
  }
  return std::sqrt(var / static_cast<double>(n));
}

double jitter(std::span<const RoundLog> logs) {
  std::vector<double> losses;
  losses.reserve(logs.size());
  for (const auto& r : logs) {
    losses.push_back(r.loss);
  }
  return jitter(std::span<const double>(losses));
}

double mean_round_time(std::span<const RoundLog> logs) {
  return logs.empty() ? 0.0 : logs.back().time / static_cast<double>(logs.size());
}

RunSummary summarize(std::string mechanism, std::span<const RoundLog> logs,
                     std::span<const double> thresholds) {
  RunSummary s;
  s.mechanism = std::move(mechanism);
  for (const double thr : thresholds) {
    s.thresholds.push_back({thr, time_to_accuracy(logs, thr), energy_to_accuracy(logs, thr)});
  }
  s.jitter = jitter(logs);
  s.rounds = logs.size();
  s.mean_round_time = mean_round_time(logs);
  if (!logs.empty()) {
    s.final_loss = logs.back().loss;
    s.final_accuracy = logs.back().accuracy;
    s.total_energy = logs.back().cumulative_energy;
    for (const auto& r : logs) {
      s.best_accuracy = std::max(s.best_accuracy, r.accuracy);
    }
  }
  return s;
}

void to_json(nlohmann::json& j, const ThresholdResult& r) {
  j = {{"threshold", r.threshold},
       {"time", r.time ? nlohmann::json(*r.time) : nlohmann::json(nullptr)},
       {"energy", r.energy ? nlohmann::json(*r.energy) : nlohmann::json(nullptr)}};
}

void to_json(nlohmann::json& j, const RunSummary& s) {
  j = {{"mechanism", s.mechanism},
       {"thresholds", s.thresholds},
       {"jitter", s.jitter},
       {"rounds", s.rounds},
       {"mean_round_time", s.mean_round_time},
       {"final_loss", s.final_loss},
       {"final_accuracy", s.final_accuracy},
       {"best_accuracy", s.best_accuracy},
       {"total_energy", s.total_energy}};
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      continue;
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) {
    throw ValidationError("unterminated quoted CSV field");
  }
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_round_csv(std::ostream& out, std::span<const RoundLog> logs) {
  for (std::size_t c = 0; c < kRoundColumns; ++c) {
    out << (c ? "," : "") << kRoundHeader[c];
  }
  out << "\r\n";
  for (const auto& r : logs) {
    const std::string fields[] = {
        std::to_string(r.round),
        format_double(r.time),
        std::to_string(r.group),
        std::to_string(r.staleness),
        format_double(r.sigma),
        format_double(r.eta),
        format_double(r.cost),
        std::to_string(r.power_iterations),
        join(r.participants, [](std::size_t v) { return std::to_string(v); }),
        join(r.energies, [](double v) { return format_double(v); }),
        format_double(r.loss),
        format_double(r.accuracy),
        format_double(r.cumulative_energy)};
    for (std::size_t c = 0; c < kRoundColumns; ++c) {
      out << (c ? "," : "") << csv_escape(fields[c]);
    }
    out << "\r\n";
  }
}

std::vector<RoundLog> read_round_csv(std::istream& in) {
  const auto rows = parse_csv(in);
  if (rows.empty()) {
    throw ValidationError("round CSV has no header");
  }
  if (rows[0].size() != kRoundColumns) {
    throw ValidationError("round CSV header has the wrong column count");
  }
  for (std::size_t c = 0; c < kRoundColumns; ++c) {
    if (rows[0][c] != kRoundHeader[c]) {
      throw ValidationError("unexpected round CSV column '" + rows[0][c] + "'");
    }
  }
  std::vector<RoundLog> logs;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != kRoundColumns) {
      throw ValidationError("round CSV row " + std::to_string(r) + " has the wrong column count");
    }
    RoundLog log;
    log.round = parse_size(f[0]);
    log.time = parse_double(f[1]);
    log.group = std::stoi(f[2]);
    log.staleness = parse_size(f[3]);
    log.sigma = parse_double(f[4]);
    log.eta = parse_double(f[5]);
    log.cost = parse_double(f[6]);
    log.power_iterations = parse_size(f[7]);
    for (const auto& p : split(f[8], ';')) {
      log.participants.push_back(parse_size(p));
    }
    for (const auto& e : split(f[9], ';')) {
      log.energies.push_back(parse_double(e));
    }
    log.loss = parse_double(f[10]);
    log.accuracy = parse_double(f[11]);
    log.cumulative_energy = parse_double(f[12]);
    logs.push_back(std::move(log));
  }
  return logs;
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
  std::vector<double> thresholds;
  if (!rows.empty()) {
    for (const auto& t : rows.front().summary.thresholds) {
      thresholds.push_back(t.threshold);
    }
  }
  out << "run,mechanism,axis,value,seed,rounds,mean_round_time,jitter,final_loss,"
         "final_accuracy,best_accuracy,total_energy";
  for (const double t : thresholds) {
    out << ",time_to_" << format_double(t) << ",energy_to_" << format_double(t);
  }
  out << "\r\n";
  for (const auto& row : rows) {
    const auto& s = row.summary;
    out << csv_escape(row.run) << ',' << csv_escape(s.mechanism) << ',' << csv_escape(row.axis)
        << ',' << csv_escape(row.value) << ',' << row.seed << ',' << s.rounds << ','
        << format_double(s.mean_round_time) << ',' << format_double(s.jitter) << ','
        << format_double(s.final_loss) << ',' << format_double(s.final_accuracy) << ','
        << format_double(s.best_accuracy) << ',' << format_double(s.total_energy);
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      const ThresholdResult* t = k < s.thresholds.size() ? &s.thresholds[k] : nullptr;
      out << ',' << (t ? optional_text(t->time) : "") << ','
          << (t ? optional_text(t->energy) : "");
    }
    out << "\r\n";
  }
}

}  // namespace airfedga
