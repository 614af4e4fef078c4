#include "popmarket/model.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace popmarket {

void MarketConfig::validate() const {
  if (n_alternatives < 1) throw std::invalid_argument("n_alternatives must be at least 1");
  if (n_agents < 1) throw std::invalid_argument("n_agents must be at least 1");
  if (!(diversity >= 0.0 && diversity <= 1.0)) {
    throw std::invalid_argument("diversity must lie in [0, 1], got " + std::to_string(diversity));
  }
  if (!(search_cost > 0.0) || !std::isfinite(search_cost)) {
    throw std::invalid_argument("search_cost must be positive and finite, got " +
                                std::to_string(search_cost));
  }
  if (!std::isfinite(objective_mean)) throw std::invalid_argument("objective_mean must be finite");
  if (!std::isfinite(subjective_mean)) {
    throw std::invalid_argument("subjective_mean must be finite");
  }
  if (!std::isfinite(threshold)) throw std::invalid_argument("threshold must be finite");
}

PopularityVector::PopularityVector(std::vector<std::uint64_t> counts)
    : counts_(std::move(counts)),
      total_(std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0})) {}

void PopularityVector::record_choice(std::size_t index) {
  if (index >= counts_.size()) {
    throw std::out_of_range("popularity index " + std::to_string(index) + " out of range");
  }
  ++counts_[index];
  ++total_;
}

std::vector<double> draw_normal(double mean, double variance, std::size_t n, Stream& stream) {
  if (variance < 0.0) throw std::invalid_argument("variance must be non-negative");
  if (variance == 0.0) return std::vector<double>(n, mean);
  std::normal_distribution<double> dist(mean, std::sqrt(variance));
  std::vector<double> out(n);
  for (auto& v : out) v = dist(stream);
  return out;
}

Environment generate_environment(const MarketConfig& config, Stream& stream) {
  config.validate();
  return Environment{draw_normal(config.objective_mean, config.objective_variance(),
                                 config.n_alternatives, stream)};
}

AgentPreferences generate_preferences(const MarketConfig& config, Stream& stream) {
  return AgentPreferences{draw_normal(config.subjective_mean, config.subjective_variance(),
                                      config.n_alternatives, stream)};
}

double agent_utility(const Environment& env, const AgentPreferences& prefs, std::size_t index) {
  if (index >= env.size() || index >= prefs.size()) {
    throw std::out_of_range("alternative index " + std::to_string(index) + " out of range");
  }
  return env.objective_utilities[index] + prefs.subjective_utilities[index];
}

}  // namespace popmarket
