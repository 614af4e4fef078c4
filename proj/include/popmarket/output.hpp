#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "popmarket/experiment.hpp"

namespace popmarket {

inline constexpr std::string_view kAggregateHeader =
    "diversity,cost,threshold,mean_gross,mean_net,mean_total_cost,sd_net_across_reps,"
    "mean_samples,mean_final_path_quality,n_replications,baseline";
inline constexpr std::string_view kPositionsHeader =
    "diversity,cost,agent_position,mean_gross,mean_net,mean_samples,mean_path_quality";
inline constexpr std::string_view kAgentsHeader =
    "diversity,cost,replication,agent_position,chosen_index,samples,gross,net";

inline constexpr std::string_view kRibbonDefinition =
    "sd_net_across_reps: +/-1 sample standard deviation (n-1) across replications of the "
    "per-replication mean net utility over all agents";

// Shortest decimal text that parses back to exactly `value`.
[[nodiscard]] std::string format_double(double value);

// Strict parse of a whole field; throws std::invalid_argument.
[[nodiscard]] double parse_double(std::string_view text);

// All I/O failures throw std::runtime_error naming the file.
void write_aggregate_csv(const std::filesystem::path& path,
                         std::vector<AggregateRecord> records);
void write_positions_csv(const std::filesystem::path& path,
                         std::vector<PositionRecord> records);

[[nodiscard]] std::vector<AggregateRecord> read_aggregate_csv(const std::filesystem::path& path);

// Streams per-agent rows cell by cell. Rows of one cell are written in
// (replication, agent_position) order.
class AgentCsvWriter {
 public:
  explicit AgentCsvWriter(std::filesystem::path path);

  void write(const MarketConfig& config, std::size_t replication, const MarketResult& result);
  void write(const CellResult& cell);
  void close();

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

// Contents of run.json.
struct RunMetadata {
  std::string command;
  SweepConfig sweep;
  // Present for `run` / `baseline`; overrides the calibrated threshold when set.
  bool threshold_override = false;
  double threshold = 0.0;
  std::vector<ThresholdSolution> thresholds;
  std::vector<std::string> outputs;
  std::string status = "complete";
  std::string error;
  double wall_time_seconds = 0.0;
};

void write_run_json(const std::filesystem::path& path, const RunMetadata& meta);

// Applies fields from a flat key/value document to `sweep`. Accepts either a
// JSON object (the `config` object of a run.json, or a flat object) or
// `key = value` lines with '#' comments. Keys are SweepConfig field names.
// Returns the keys that were applied. Throws std::invalid_argument on unknown
// keys or malformed values.
std::vector<std::string> apply_config_file(const std::filesystem::path& path, SweepConfig& sweep);

// Decimal, "a/b" or "a/b^k" (e.g. "1/2^3"). Throws std::invalid_argument.
[[nodiscard]] double parse_cost(std::string_view text);
// Comma-separated list of parse_cost / parse_double values.
[[nodiscard]] std::vector<double> parse_cost_list(std::string_view text);
[[nodiscard]] std::vector<double> parse_double_list(std::string_view text);

}  // namespace popmarket
