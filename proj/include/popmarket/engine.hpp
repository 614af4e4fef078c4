#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "popmarket/model.hpp"
#include "popmarket/streams.hpp"

namespace popmarket {

// Order in which one agent samples the alternatives.
struct SearchPath {
  std::vector<std::size_t> order;

  [[nodiscard]] std::size_t size() const noexcept { return order.size(); }
};

struct MarketResult {
  MarketConfig config;
  // In decision order.
  std::vector<AgentOutcome> outcomes;
  PopularityVector final_popularity;
  // compute_path_quality() of each agent's path, in decision order.
  std::vector<double> path_quality_trace;
};

// How agents order their search.
enum class SearchOrder { popularity, random };

// Snapshot handed to a StepObserver after each agent decides. References are
// valid only for the duration of the call.
struct AgentStep {
  std::size_t agent_index;
  const PopularityVector& popularity_before;
  const SearchPath& path;
  const AgentPreferences& preferences;
  const AgentOutcome& outcome;
};

using StepObserver = std::function<void(const Environment&, const AgentStep&)>;

// Alternatives by decreasing count; each group of equal counts is in uniformly
// random order drawn from `stream`.
[[nodiscard]] SearchPath build_search_path(const PopularityVector& popularity, Stream& stream);

// Uniform random permutation of 0..n-1.
[[nodiscard]] SearchPath random_search_path(std::size_t n_alternatives, Stream& stream);

// Samples along `path`, paying `search_cost` per alternative, and stops at the
// first alternative whose utility strictly exceeds `threshold`. If none does,
// the best sampled alternative is taken (earliest on ties).
[[nodiscard]] AgentOutcome run_agent(const Environment& env, const AgentPreferences& prefs,
                                     const SearchPath& path, double threshold,
                                     double search_cost);

// Kendall tau-b between path position and descending objective utility: +1
// when the path visits alternatives best-first, -1 when worst-first, 0 when
// objective utilities are all equal.
[[nodiscard]] double compute_path_quality(const SearchPath& path, const Environment& env);

// One replication: draws the environment from streams.environment() and, for
// each agent m, preferences then tie-breaks from streams.agent(m).
[[nodiscard]] MarketResult run_market(const MarketConfig& config, const StreamFamily& streams,
                                      const StepObserver& observer = {});

// As run_market, but every agent searches in uniform random order. Popularity
// is still tallied for reporting.
[[nodiscard]] MarketResult run_random_baseline(const MarketConfig& config,
                                               const StreamFamily& streams,
                                               const StepObserver& observer = {});

// Runs a market over a caller-supplied environment. The environment stream is
// not used.
[[nodiscard]] MarketResult run_market_in(const MarketConfig& config, const Environment& env,
                                         const StreamFamily& streams, SearchOrder order,
                                         const StepObserver& observer = {});

}  // namespace popmarket
