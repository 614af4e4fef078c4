#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "popmarket/engine.hpp"
#include "popmarket/stopping.hpp"
#include "popmarket/streams.hpp"

namespace popmarket {

// {0, 0.1, ..., 1.0}
[[nodiscard]] std::vector<double> default_diversity_grid();
// {1/2^2, ..., 1/2^8}
[[nodiscard]] std::vector<double> default_cost_grid();

struct SweepConfig {
  std::vector<double> diversity_grid = default_diversity_grid();
  std::vector<double> cost_grid = default_cost_grid();
  std::size_t replications = 1000;
  std::size_t n_agents = 1000;
  std::size_t n_alternatives = 100;
  std::uint64_t master_seed = 1;
  bool include_baseline = false;
  double objective_mean = 0.0;
  double subjective_mean = 0.0;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  // Market parameters of grid cell (diversity_index, cost_index), threshold calibrated.
  [[nodiscard]] MarketConfig market_config(std::size_t diversity_index,
                                           std::size_t cost_index) const;

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct AggregateRecord {
  double diversity = 0.0;
  double cost = 0.0;
  double threshold = 0.0;
  double mean_gross = 0.0;
  double mean_net = 0.0;
  // Mean over agents of samples * cost.
  double mean_total_cost = 0.0;
  // Standard deviation (n - 1 denominator) over replications of the
  // per-replication mean net utility; 0 for a single replication.
  double sd_net_across_reps = 0.0;
  double mean_samples = 0.0;
  // Path quality of the last agent to decide, averaged over replications.
  double mean_final_path_quality = 0.0;
  std::size_t n_replications = 0;
  bool baseline = false;

  friend bool operator==(const AggregateRecord&, const AggregateRecord&) = default;
};

struct PositionRecord {
  double diversity = 0.0;
  double cost = 0.0;
  // 1-based decision position.
  std::size_t agent_position = 0;
  double mean_gross = 0.0;
  double mean_net = 0.0;
  double mean_samples = 0.0;
  double mean_path_quality = 0.0;

  friend bool operator==(const PositionRecord&, const PositionRecord&) = default;
};

// All replications of one (diversity, cost, arm) grid cell, in replication order.
struct CellResult {
  std::size_t diversity_index = 0;
  std::size_t cost_index = 0;
  Arm arm = Arm::popularity;
  MarketConfig config;
  ThresholdSolution threshold;
  std::vector<MarketResult> replications;
};

// Raised when a cell fails; carries the cell coordinates in what().
class CellError : public std::runtime_error {
 public:
  CellError(const std::string& message, double diversity, double cost, bool baseline)
      : std::runtime_error(message), diversity_(diversity), cost_(cost), baseline_(baseline) {}

  [[nodiscard]] double diversity() const noexcept { return diversity_; }
  [[nodiscard]] double cost() const noexcept { return cost_; }
  [[nodiscard]] bool baseline() const noexcept { return baseline_; }

 private:
  double diversity_;
  double cost_;
  bool baseline_;
};

struct ExecutionOptions {
  // 0 means std::thread::hardware_concurrency(). Never affects results.
  std::size_t threads = 0;
  // Called after each cell, in deterministic order, with the full cell.
  std::function<void(const CellResult&)> on_cell;
  // Human-readable progress (cells done, cells total).
  std::function<void(std::size_t, std::size_t)> on_progress;
};

// Runs f(0) ... f(count - 1) on up to `threads` workers. Rethrows the
// exception of the lowest failing index.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& f);

[[nodiscard]] std::size_t resolve_threads(std::size_t requested) noexcept;

[[nodiscard]] CellResult run_cell(const SweepConfig& sweep, std::size_t diversity_index,
                                  std::size_t cost_index, Arm arm, std::size_t threads = 1);

[[nodiscard]] AggregateRecord aggregate(const CellResult& cell);

// Across-replication means at each decision position. All results must come
// from the same cell; throws std::invalid_argument otherwise or when empty.
[[nodiscard]] std::vector<PositionRecord> position_profile(std::span<const MarketResult> results);

// Every (diversity, cost) cell, plus the random baseline per cell when
// sweep.include_baseline is set. Records are sorted by (diversity, cost, baseline).
// A failing cell throws CellError.
[[nodiscard]] std::vector<AggregateRecord> run_sweep(const SweepConfig& sweep,
                                                     const ExecutionOptions& options = {});

// Orders records as they appear in aggregate.csv.
void sort_records(std::vector<AggregateRecord>& records);

}  // namespace popmarket
