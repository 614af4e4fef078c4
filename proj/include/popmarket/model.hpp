#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "popmarket/streams.hpp"

namespace popmarket {

// Parameters of one market. Total utility variance is fixed at 1 and split by
// `diversity` into an agent-specific share (diversity) and a shared share
// (1 - diversity).
struct MarketConfig {
  std::size_t n_alternatives = 100;
  std::size_t n_agents = 1000;
  double diversity = 0.0;
  double search_cost = 0.125;
  double objective_mean = 0.0;
  double subjective_mean = 0.0;
  // Satisficing level; normally set by calibrate_threshold().
  double threshold = 0.0;

  [[nodiscard]] double objective_variance() const noexcept { return 1.0 - diversity; }
  [[nodiscard]] double subjective_variance() const noexcept { return diversity; }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  friend bool operator==(const MarketConfig&, const MarketConfig&) = default;
};

// Shared utility components, one per alternative, drawn once per replication.
struct Environment {
  std::vector<double> objective_utilities;

  [[nodiscard]] std::size_t size() const noexcept { return objective_utilities.size(); }
};

// One agent's private utility components.
struct AgentPreferences {
  std::vector<double> subjective_utilities;

  [[nodiscard]] std::size_t size() const noexcept { return subjective_utilities.size(); }
};

// Running tally of past choices. Only ever incremented, one unit per choice.
class PopularityVector {
 public:
  PopularityVector() = default;
  explicit PopularityVector(std::size_t n_alternatives) : counts_(n_alternatives, 0) {}
  explicit PopularityVector(std::vector<std::uint64_t> counts);

  void record_choice(std::size_t index);

  [[nodiscard]] const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  [[nodiscard]] std::uint64_t operator[](std::size_t index) const { return counts_.at(index); }
  [[nodiscard]] std::size_t size() const noexcept { return counts_.size(); }
  [[nodiscard]] std::uint64_t total() const noexcept { return total_; }

  friend bool operator==(const PopularityVector&, const PopularityVector&) = default;

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

struct AgentOutcome {
  std::size_t chosen_index = 0;
  std::size_t samples = 0;
  double gross_utility = 0.0;
  double net_utility = 0.0;

  friend bool operator==(const AgentOutcome&, const AgentOutcome&) = default;
};

// n draws from Normal(mean, variance). Zero variance returns the mean exactly
// and consumes nothing from the stream.
[[nodiscard]] std::vector<double> draw_normal(double mean, double variance, std::size_t n,
                                              Stream& stream);

[[nodiscard]] Environment generate_environment(const MarketConfig& config, Stream& stream);
[[nodiscard]] AgentPreferences generate_preferences(const MarketConfig& config, Stream& stream);

// Total utility of alternative `index` for the agent holding `prefs`.
// Throws std::out_of_range for an invalid index.
[[nodiscard]] double agent_utility(const Environment& env, const AgentPreferences& prefs,
                                   std::size_t index);

}  // namespace popmarket
