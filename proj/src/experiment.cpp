#include "popmarket/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <tuple>

namespace popmarket {

std::vector<double> default_diversity_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

std::vector<double> default_cost_grid() {
  std::vector<double> grid;
  for (int k = 2; k <= 8; ++k) grid.push_back(std::ldexp(1.0, -k));
  return grid;
}

void SweepConfig::validate() const {
  if (diversity_grid.empty()) throw std::invalid_argument("diversity_grid must not be empty");
  if (cost_grid.empty()) throw std::invalid_argument("cost_grid must not be empty");
  for (const double d : diversity_grid) {
    if (!(d >= 0.0 && d <= 1.0)) {
      throw std::invalid_argument("diversity_grid values must lie in [0, 1], got " +
                                  std::to_string(d));
    }
  }
  for (const double c : cost_grid) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument("cost_grid values must be positive, got " + std::to_string(c));
    }
  }
  if (replications < 1) throw std::invalid_argument("replications must be at least 1");
  if (n_agents < 1) throw std::invalid_argument("n_agents must be at least 1");
  if (n_alternatives < 1) throw std::invalid_argument("n_alternatives must be at least 1");
  if (!std::isfinite(objective_mean) || !std::isfinite(subjective_mean)) {
    throw std::invalid_argument("utility means must be finite");
  }
}

MarketConfig SweepConfig::market_config(std::size_t diversity_index,
                                        std::size_t cost_index) const {
  MarketConfig config;
  config.n_alternatives = n_alternatives;
  config.n_agents = n_agents;
  config.diversity = diversity_grid.at(diversity_index);
  config.search_cost = cost_grid.at(cost_index);
  config.objective_mean = objective_mean;
  config.subjective_mean = subjective_mean;
  calibrate_threshold(config);
  config.validate();
  return config;
}

std::size_t resolve_threads(std::size_t requested) noexcept {
  if (requested > 0) return requested;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::min(resolve_threads(threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error;

  auto work = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        f(i);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

CellResult run_cell(const SweepConfig& sweep, std::size_t diversity_index,
                    std::size_t cost_index, Arm arm, std::size_t threads) {
  CellResult cell;
  cell.diversity_index = diversity_index;
  cell.cost_index = cost_index;
  cell.arm = arm;
  const bool baseline = arm == Arm::random_baseline;
  try {
    cell.config = sweep.market_config(diversity_index, cost_index);
    cell.threshold = solve_threshold(total_utility_spec(cell.config), cell.config.search_cost);
    cell.replications.resize(sweep.replications);
    parallel_for(sweep.replications, threads, [&](std::size_t rep) {
      const StreamFamily streams =
          derive_streams(sweep.master_seed, diversity_index, cost_index, rep, arm);
      cell.replications[rep] = baseline ? run_random_baseline(cell.config, streams)
                                        : run_market(cell.config, streams);
    });
  } catch (const std::exception& e) {
    const double d = sweep.diversity_grid.at(diversity_index);
    const double c = sweep.cost_grid.at(cost_index);
    throw CellError("cell diversity=" + std::to_string(d) + " cost=" + std::to_string(c) +
                        (baseline ? " (baseline)" : "") + " failed: " + e.what(),
                    d, c, baseline);
  }
  return cell;
}

AggregateRecord aggregate(const CellResult& cell) {
  if (cell.replications.empty()) throw std::invalid_argument("aggregate: cell has no replications");

  const double cost = cell.config.search_cost;
  const auto reps = static_cast<double>(cell.replications.size());
  std::vector<double> net_by_rep;
  net_by_rep.reserve(cell.replications.size());
  double gross_sum = 0.0;
  double net_sum = 0.0;
  double total_cost_sum = 0.0;
  double samples_sum = 0.0;
  double final_quality_sum = 0.0;

  for (const MarketResult& rep : cell.replications) {
    const auto agents = static_cast<double>(rep.outcomes.size());
    double gross = 0.0;
    double net = 0.0;
    double total_cost = 0.0;
    double samples = 0.0;
    for (const AgentOutcome& o : rep.outcomes) {
      gross += o.gross_utility;
      net += o.net_utility;
      total_cost += static_cast<double>(o.samples) * cost;
      samples += static_cast<double>(o.samples);
    }
    net_by_rep.push_back(net / agents);
    gross_sum += gross / agents;
    net_sum += net / agents;
    total_cost_sum += total_cost / agents;
    samples_sum += samples / agents;
    final_quality_sum += rep.path_quality_trace.back();
  }

  AggregateRecord record;
  record.diversity = cell.config.diversity;
  record.cost = cost;
  record.threshold = cell.config.threshold;
  record.mean_gross = gross_sum / reps;
  record.mean_net = net_sum / reps;
  record.mean_total_cost = total_cost_sum / reps;
  record.mean_samples = samples_sum / reps;
  record.mean_final_path_quality = final_quality_sum / reps;
  record.n_replications = cell.replications.size();
  record.baseline = cell.arm == Arm::random_baseline;

  if (net_by_rep.size() > 1) {
    double ss = 0.0;
    for (const double v : net_by_rep) ss += (v - record.mean_net) * (v - record.mean_net);
    record.sd_net_across_reps = std::sqrt(ss / (reps - 1.0));
  }
  return record;
}

std::vector<PositionRecord> position_profile(std::span<const MarketResult> results) {
  if (results.empty()) throw std::invalid_argument("position_profile: no results");
  const MarketConfig& config = results.front().config;
  for (const MarketResult& r : results) {
    if (r.config != config) {
      throw std::invalid_argument("position_profile: results come from different cells");
    }
    if (r.outcomes.size() != config.n_agents || r.path_quality_trace.size() != config.n_agents) {
      throw std::invalid_argument("position_profile: result length does not match n_agents");
    }
  }

  std::vector<PositionRecord> profile(config.n_agents);
  for (std::size_t m = 0; m < config.n_agents; ++m) {
    PositionRecord& p = profile[m];
    p.diversity = config.diversity;
    p.cost = config.search_cost;
    p.agent_position = m + 1;
    for (const MarketResult& r : results) {
      p.mean_gross += r.outcomes[m].gross_utility;
      p.mean_net += r.outcomes[m].net_utility;
      p.mean_samples += static_cast<double>(r.outcomes[m].samples);
      p.mean_path_quality += r.path_quality_trace[m];
    }
    const auto n = static_cast<double>(results.size());
    p.mean_gross /= n;
    p.mean_net /= n;
    p.mean_samples /= n;
    p.mean_path_quality /= n;
  }
  return profile;
}

void sort_records(std::vector<AggregateRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const AggregateRecord& a, const AggregateRecord& b) {
                     return std::tie(a.diversity, a.cost, a.baseline) <
                            std::tie(b.diversity, b.cost, b.baseline);
                   });
}

std::vector<AggregateRecord> run_sweep(const SweepConfig& sweep,
                                       const ExecutionOptions& options) {
  sweep.validate();
  const std::size_t arms = sweep.include_baseline ? 2 : 1;
  const std::size_t total = sweep.diversity_grid.size() * sweep.cost_grid.size() * arms;

  std::vector<AggregateRecord> records;
  records.reserve(total);
  std::size_t done = 0;
  for (std::size_t di = 0; di < sweep.diversity_grid.size(); ++di) {
    for (std::size_t ci = 0; ci < sweep.cost_grid.size(); ++ci) {
      for (std::size_t a = 0; a < arms; ++a) {
        const Arm arm = a == 0 ? Arm::popularity : Arm::random_baseline;
        const CellResult cell = run_cell(sweep, di, ci, arm, options.threads);
        records.push_back(aggregate(cell));
        if (options.on_cell) options.on_cell(cell);
        if (options.on_progress) options.on_progress(++done, total);
      }
    }
  }
  sort_records(records);
  return records;
}

}  // namespace popmarket
