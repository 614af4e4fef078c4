#include "popmarket/engine.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <stdexcept>

#include "popmarket/rank_correlation.hpp"

namespace popmarket {

SearchPath random_search_path(std::size_t n_alternatives, Stream& stream) {
  SearchPath path;
  path.order.resize(n_alternatives);
  std::iota(path.order.begin(), path.order.end(), std::size_t{0});
  std::shuffle(path.order.begin(), path.order.end(), stream);
  return path;
}

SearchPath build_search_path(const PopularityVector& popularity, Stream& stream) {
  // A uniform shuffle followed by a stable sort on count leaves every tie
  // group in uniformly random relative order.
  SearchPath path = random_search_path(popularity.size(), stream);
  if (popularity.total() == 0) return path;
  const auto& counts = popularity.counts();
  std::stable_sort(path.order.begin(), path.order.end(),
                   [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  return path;
}

AgentOutcome run_agent(const Environment& env, const AgentPreferences& prefs,
                       const SearchPath& path, double threshold, double search_cost) {
  if (path.size() == 0 || path.size() != env.size() || env.size() != prefs.size()) {
    throw std::invalid_argument("run_agent: environment, preferences and path lengths differ");
  }
  AgentOutcome outcome;
  double best = 0.0;
  for (std::size_t step = 0; step < path.size(); ++step) {
    const std::size_t index = path.order[step];
    const double u = agent_utility(env, prefs, index);
    if (step == 0 || u > best) {
      best = u;
      outcome.chosen_index = index;
    }
    outcome.samples = step + 1;
    // Everything sampled before is <= threshold, so u is already the best.
    if (u > threshold) break;
  }
  outcome.gross_utility = best;
  outcome.net_utility = best - static_cast<double>(outcome.samples) * search_cost;
  return outcome;
}

double compute_path_quality(const SearchPath& path, const Environment& env) {
  if (path.size() != env.size()) {
    throw std::invalid_argument("compute_path_quality: path and environment lengths differ");
  }
  std::vector<double> along_path(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    along_path[i] = env.objective_utilities.at(path.order[i]);
  }
  // Positive when utility falls along the path.
  return -kendall_tau_b_with_position(along_path);
}

MarketResult run_market_in(const MarketConfig& config, const Environment& env,
                           const StreamFamily& streams, SearchOrder order,
                           const StepObserver& observer) {
  config.validate();
  if (env.size() != config.n_alternatives) {
    throw std::invalid_argument("environment size does not match n_alternatives");
  }

  MarketResult result;
  result.config = config;
  result.outcomes.reserve(config.n_agents);
  result.path_quality_trace.reserve(config.n_agents);
  PopularityVector popularity(config.n_alternatives);

  for (std::size_t agent = 0; agent < config.n_agents; ++agent) {
    Stream stream = streams.agent(agent);
    // Preferences are drawn before any tie-break so that stream consumption
    // does not depend on the search order.
    const AgentPreferences prefs = generate_preferences(config, stream);
    const SearchPath path = order == SearchOrder::popularity
                                ? build_search_path(popularity, stream)
                                : random_search_path(config.n_alternatives, stream);
    const AgentOutcome outcome =
        run_agent(env, prefs, path, config.threshold, config.search_cost);

    if (observer) observer(env, AgentStep{agent, popularity, path, prefs, outcome});

    popularity.record_choice(outcome.chosen_index);
    assert(popularity.total() == agent + 1);
    result.outcomes.push_back(outcome);
    result.path_quality_trace.push_back(compute_path_quality(path, env));
  }
  result.final_popularity = std::move(popularity);
  return result;
}

MarketResult run_market(const MarketConfig& config, const StreamFamily& streams,
                        const StepObserver& observer) {
  Stream env_stream = streams.environment();
  const Environment env = generate_environment(config, env_stream);
  return run_market_in(config, env, streams, SearchOrder::popularity, observer);
}

MarketResult run_random_baseline(const MarketConfig& config, const StreamFamily& streams,
                                 const StepObserver& observer) {
  Stream env_stream = streams.environment();
  const Environment env = generate_environment(config, env_stream);
  return run_market_in(config, env, streams, SearchOrder::random, observer);
}

}  // namespace popmarket
