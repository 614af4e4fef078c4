#include "popmarket/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

namespace popmarket {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view text, const char* what) {
  text = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument(std::string("invalid ") + what + " '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::ofstream open_for_writing(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

double parse_double(std::string_view text) { return parse_number<double>(text, "number"); }

double parse_cost(std::string_view text) {
  text = trim(text);
  const auto slash = text.find('/');
  double value = 0.0;
  if (slash == std::string_view::npos) {
    value = parse_number<double>(text, "cost");
  } else {
    const double numerator = parse_number<double>(text.substr(0, slash), "cost numerator");
    std::string_view denom = text.substr(slash + 1);
    double denominator = 0.0;
    if (const auto caret = denom.find('^'); caret != std::string_view::npos) {
      const double base = parse_number<double>(denom.substr(0, caret), "cost base");
      const double exponent = parse_number<double>(denom.substr(caret + 1), "cost exponent");
      denominator = std::pow(base, exponent);
    } else {
      denominator = parse_number<double>(denom, "cost denominator");
    }
    value = numerator / denominator;
  }
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument("cost must be positive and finite, got '" + std::string(text) +
                                "'");
  }
  return value;
}

std::vector<double> parse_cost_list(std::string_view text) {
  std::vector<double> values;
  for (const auto part : split(text, ',')) values.push_back(parse_cost(part));
  return values;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> values;
  for (const auto part : split(text, ',')) values.push_back(parse_double(part));
  return values;
}

void write_aggregate_csv(const fs::path& path, std::vector<AggregateRecord> records) {
  sort_records(records);
  auto out = open_for_writing(path);
  out << kAggregateHeader << '\n';
  for (const auto& r : records) {
    out << format_double(r.diversity) << ',' << format_double(r.cost) << ','
        << format_double(r.threshold) << ',' << format_double(r.mean_gross) << ','
        << format_double(r.mean_net) << ',' << format_double(r.mean_total_cost) << ','
        << format_double(r.sd_net_across_reps) << ',' << format_double(r.mean_samples) << ','
        << format_double(r.mean_final_path_quality) << ',' << r.n_replications << ','
        << (r.baseline ? 1 : 0) << '\n';
  }
  finish(out, path);
}

void write_positions_csv(const fs::path& path, std::vector<PositionRecord> records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const PositionRecord& a, const PositionRecord& b) {
                     return std::tie(a.diversity, a.cost, a.agent_position) <
                            std::tie(b.diversity, b.cost, b.agent_position);
                   });
  auto out = open_for_writing(path);
  out << kPositionsHeader << '\n';
  for (const auto& r : records) {
    out << format_double(r.diversity) << ',' << format_double(r.cost) << ','
        << r.agent_position << ',' << format_double(r.mean_gross) << ','
        << format_double(r.mean_net) << ',' << format_double(r.mean_samples) << ','
        << format_double(r.mean_path_quality) << '\n';
  }
  finish(out, path);
}

std::vector<AggregateRecord> read_aggregate_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::string line;
  if (!std::getline(in, line) || line != kAggregateHeader) {
    throw std::runtime_error("'" + path.string() + "' does not have the aggregate header");
  }
  std::vector<AggregateRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 11) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 11 fields");
    }
    AggregateRecord r;
    r.diversity = parse_double(f[0]);
    r.cost = parse_double(f[1]);
    r.threshold = parse_double(f[2]);
    r.mean_gross = parse_double(f[3]);
    r.mean_net = parse_double(f[4]);
    r.mean_total_cost = parse_double(f[5]);
    r.sd_net_across_reps = parse_double(f[6]);
    r.mean_samples = parse_double(f[7]);
    r.mean_final_path_quality = parse_double(f[8]);
    r.n_replications = parse_number<std::size_t>(f[9], "n_replications");
    r.baseline = parse_number<int>(f[10], "baseline") != 0;
    records.push_back(r);
  }
  return records;
}

AgentCsvWriter::AgentCsvWriter(fs::path path)
    : path_(std::move(path)), out_(open_for_writing(path_)) {
  out_ << kAgentsHeader << '\n';
}

void AgentCsvWriter::write(const MarketConfig& config, std::size_t replication,
                           const MarketResult& result) {
  const std::string prefix =
      format_double(config.diversity) + ',' + format_double(config.search_cost) + ',' +
      std::to_string(replication) + ',';
  for (std::size_t m = 0; m < result.outcomes.size(); ++m) {
    const AgentOutcome& o = result.outcomes[m];
    out_ << prefix << (m + 1) << ',' << o.chosen_index << ',' << o.samples << ','
         << format_double(o.gross_utility) << ',' << format_double(o.net_utility) << '\n';
  }
  if (!out_) throw std::runtime_error("write to '" + path_.string() + "' failed");
}

void AgentCsvWriter::write(const CellResult& cell) {
  for (std::size_t rep = 0; rep < cell.replications.size(); ++rep) {
    write(cell.config, rep, cell.replications[rep]);
  }
}

void AgentCsvWriter::close() {
  finish(out_, path_);
  out_.close();
}

namespace {

json sweep_to_json(const SweepConfig& s) {
  return json{{"diversity_grid", s.diversity_grid},
              {"cost_grid", s.cost_grid},
              {"replications", s.replications},
              {"n_agents", s.n_agents},
              {"n_alternatives", s.n_alternatives},
              {"master_seed", s.master_seed},
              {"include_baseline", s.include_baseline},
              {"objective_mean", s.objective_mean},
              {"subjective_mean", s.subjective_mean}};
}

bool parse_bool(std::string_view text) {
  text = trim(text);
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw std::invalid_argument("invalid boolean '" + std::string(text) + "'");
}

// Applies one textual key/value pair.
void apply_field(SweepConfig& s, const std::string& key, std::string_view value) {
  if (key == "diversity_grid") {
    s.diversity_grid = parse_double_list(value);
  } else if (key == "cost_grid") {
    s.cost_grid = parse_cost_list(value);
  } else if (key == "replications") {
    s.replications = parse_number<std::size_t>(value, key.c_str());
  } else if (key == "n_agents") {
    s.n_agents = parse_number<std::size_t>(value, key.c_str());
  } else if (key == "n_alternatives") {
    s.n_alternatives = parse_number<std::size_t>(value, key.c_str());
  } else if (key == "master_seed") {
    s.master_seed = parse_number<std::uint64_t>(value, key.c_str());
  } else if (key == "include_baseline") {
    s.include_baseline = parse_bool(value);
  } else if (key == "objective_mean") {
    s.objective_mean = parse_double(value);
  } else if (key == "subjective_mean") {
    s.subjective_mean = parse_double(value);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

std::string json_value_text(const json& v) {
  if (v.is_array()) {
    std::string text;
    for (const auto& item : v) {
      if (!text.empty()) text += ',';
      text += json_value_text(item);
    }
    return text;
  }
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return format_double(v.get<double>());
  throw std::invalid_argument("unsupported config value " + v.dump());
}

}  // namespace

void write_run_json(const fs::path& path, const RunMetadata& meta) {
  json thresholds = json::array();
  for (const auto& t : meta.thresholds) {
    thresholds.push_back({{"cost", t.cost}, {"threshold", t.threshold}, {"residual", t.residual}});
  }
  json doc{{"artifact", "popmarket"},
           {"version", POPMARKET_VERSION},
           {"command", meta.command},
           {"config", sweep_to_json(meta.sweep)},
           {"thresholds", thresholds},
           {"ribbon_definition", kRibbonDefinition},
           {"aggregation",
            "per-replication means over all agents, then means over replications"},
           {"outputs", meta.outputs},
           {"status", meta.status},
           {"wall_time_seconds", meta.wall_time_seconds}};
  if (meta.threshold_override) doc["threshold_override"] = meta.threshold;
  if (!meta.error.empty()) doc["error"] = meta.error;

  auto out = open_for_writing(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

std::vector<std::string> apply_config_file(const fs::path& path, SweepConfig& sweep) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::vector<std::string> applied;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument("config file '" + path.string() + "': " + e.what());
    }
    const json& fields = doc.contains("config") ? doc.at("config") : doc;
    for (const auto& [key, value] : fields.items()) {
      apply_field(sweep, key, json_value_text(value));
      applied.push_back(key);
    }
    return applied;
  }

  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                  ": expected key = value");
    }
    std::string key(trim(view.substr(0, eq)));
    apply_field(sweep, key, trim(view.substr(eq + 1)));
    applied.push_back(std::move(key));
  }
  return applied;
}

}  // namespace popmarket
