#include "popmarket/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <stdexcept>

#include "CLI11.hpp"
#include "popmarket/engine.hpp"
#include "popmarket/experiment.hpp"
#include "popmarket/output.hpp"
#include "popmarket/stopping.hpp"

namespace popmarket {

namespace fs = std::filesystem;

namespace {

// Bad flag values detected after CLI11 parsing; reported as usage errors.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr std::uint64_t kDefaultSeed = 1;

template <typename F>
auto flag_value(const std::string& flag, F&& parse) {
  try {
    return parse();
  } catch (const std::invalid_argument& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag,
                           std::optional<std::uint64_t> from_config) {
  if (flag) return *flag;
  if (from_config) return *from_config;
  if (const char* env = std::getenv("POPMARKET_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const std::string text(env);
      const unsigned long long value = std::stoull(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return value;
    } catch (const std::exception&) {
      throw UsageError(std::string("POPMARKET_SEED: invalid seed '") + env + "'");
    }
  }
  return kDefaultSeed;
}

void check_diversity(const std::string& flag, double d) {
  if (!(d >= 0.0 && d <= 1.0)) {
    throw UsageError(flag + ": diversity must lie in [0, 1], got " + format_double(d));
  }
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create output directory '" + dir.string() +
                             "': " + ec.message());
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct ThresholdArgs {
  std::string cost;
  double mean = 0.0;
  double variance = 1.0;
};

struct MarketArgs {
  double diversity = 0.0;
  std::string cost;
  std::size_t agents = 1000;
  std::size_t alternatives = 100;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::string out = ".";
  double objective_mean = 0.0;
  double subjective_mean = 0.0;
};

struct SweepArgs {
  std::optional<std::string> diversity_grid;
  std::optional<std::string> cost_grid;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> agents;
  std::optional<std::size_t> alternatives;
  std::optional<std::uint64_t> seed;
  std::optional<double> objective_mean;
  std::optional<double> subjective_mean;
  std::string out = "results";
  bool baseline = false;
  bool positions = false;
  bool per_agent = false;
  std::size_t threads = 0;
  std::optional<std::string> config;
};

int cmd_threshold(const ThresholdArgs& a, std::ostream& out) {
  const double cost = flag_value("--cost", [&] { return parse_cost(a.cost); });
  if (!(a.variance > 0.0)) throw UsageError("--variance: must be positive");
  const ThresholdSolution s = solve_threshold(GaussianSpec{a.mean, a.variance}, cost);
  out << "T=" << format_double(s.threshold) << " residual=" << format_double(s.residual)
      << '\n';
  return kExitOk;
}

int cmd_market(const MarketArgs& a, Arm arm, const std::string& command, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  check_diversity("--diversity", a.diversity);
  const double cost = flag_value("--cost", [&] { return parse_cost(a.cost); });
  if (a.agents < 1) throw UsageError("--agents: must be at least 1");
  if (a.alternatives < 1) throw UsageError("--alternatives: must be at least 1");

  SweepConfig sweep;
  sweep.diversity_grid = {a.diversity};
  sweep.cost_grid = {cost};
  sweep.replications = 1;
  sweep.n_agents = a.agents;
  sweep.n_alternatives = a.alternatives;
  sweep.master_seed = resolve_seed(a.seed, std::nullopt);
  sweep.objective_mean = a.objective_mean;
  sweep.subjective_mean = a.subjective_mean;

  MarketConfig config = sweep.market_config(0, 0);
  const ThresholdSolution solution =
      solve_threshold(total_utility_spec(config), config.search_cost);
  if (a.threshold) config.threshold = *a.threshold;

  const fs::path dir(a.out);
  ensure_directory(dir);
  const StreamFamily streams = derive_streams(sweep.master_seed, 0, 0, 0, arm);
  const MarketResult result = arm == Arm::popularity ? run_market(config, streams)
                                                     : run_random_baseline(config, streams);

  AgentCsvWriter agents(dir / "agents.csv");
  agents.write(config, 0, result);
  agents.close();

  RunMetadata meta;
  meta.command = command;
  meta.sweep = sweep;
  meta.threshold_override = a.threshold.has_value();
  meta.threshold = config.threshold;
  meta.thresholds = {solution};
  meta.outputs = {"agents.csv"};
  meta.wall_time_seconds = seconds_since(start);
  write_run_json(dir / "run.json", meta);
  err << command << ": " << config.n_agents << " agents written to "
      << (dir / "agents.csv").string() << '\n';
  return kExitOk;
}

int cmd_sweep(const SweepArgs& a, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  SweepConfig sweep;
  std::optional<std::uint64_t> config_seed;
  if (a.config) {
    const auto applied = flag_value("--config", [&] { return apply_config_file(*a.config, sweep); });
    if (std::find(applied.begin(), applied.end(), "master_seed") != applied.end()) {
      config_seed = sweep.master_seed;
    }
  }
  // Flags override config-file values.
  if (a.diversity_grid) {
    sweep.diversity_grid =
        flag_value("--diversity-grid", [&] { return parse_double_list(*a.diversity_grid); });
    for (const double d : sweep.diversity_grid) check_diversity("--diversity-grid", d);
  }
  if (a.cost_grid) {
    sweep.cost_grid = flag_value("--cost-grid", [&] { return parse_cost_list(*a.cost_grid); });
  }
  if (a.reps) sweep.replications = *a.reps;
  if (a.agents) sweep.n_agents = *a.agents;
  if (a.alternatives) sweep.n_alternatives = *a.alternatives;
  if (a.objective_mean) sweep.objective_mean = *a.objective_mean;
  if (a.subjective_mean) sweep.subjective_mean = *a.subjective_mean;
  if (a.baseline) sweep.include_baseline = true;
  sweep.master_seed = resolve_seed(a.seed, config_seed);
  flag_value("sweep configuration", [&] {
    sweep.validate();
    return 0;
  });

  const fs::path dir(a.out);
  ensure_directory(dir);

  RunMetadata meta;
  meta.command = "sweep";
  meta.sweep = sweep;
  for (std::size_t ci = 0; ci < sweep.cost_grid.size(); ++ci) {
    const MarketConfig config = sweep.market_config(0, ci);
    meta.thresholds.push_back(solve_threshold(total_utility_spec(config), config.search_cost));
  }
  meta.outputs = {"aggregate.csv"};
  if (a.positions) meta.outputs.emplace_back("positions.csv");
  if (a.per_agent) meta.outputs.emplace_back("agents.csv");
  meta.status = "incomplete";
  write_run_json(dir / "run.json", meta);

  std::optional<AgentCsvWriter> agents;
  if (a.per_agent) agents.emplace(dir / "agents.csv");
  std::vector<PositionRecord> positions;

  ExecutionOptions options;
  options.threads = a.threads;
  options.on_cell = [&](const CellResult& cell) {
    try {
      if (cell.arm != Arm::popularity) return;
      if (agents) agents->write(cell);
      if (a.positions) {
        auto profile = position_profile(cell.replications);
        positions.insert(positions.end(), profile.begin(), profile.end());
      }
    } catch (const std::exception& e) {
      throw CellError("cell diversity=" + format_double(cell.config.diversity) +
                          " cost=" + format_double(cell.config.search_cost) + ": " + e.what(),
                      cell.config.diversity, cell.config.search_cost,
                      cell.arm == Arm::random_baseline);
    }
  };
  options.on_progress = [&](std::size_t done, std::size_t total) {
    err << "sweep: " << done << "/" << total << " cells (" << format_double(seconds_since(start))
        << " s)\n";
  };

  try {
    const auto records = run_sweep(sweep, options);
    if (agents) agents->close();
    write_aggregate_csv(dir / "aggregate.csv", records);
    if (a.positions) write_positions_csv(dir / "positions.csv", positions);
  } catch (const std::exception& e) {
    meta.status = "failed";
    meta.error = e.what();
    meta.wall_time_seconds = seconds_since(start);
    try {
      write_run_json(dir / "run.json", meta);
    } catch (const std::exception&) {
    }
    throw;
  }

  meta.status = "complete";
  meta.wall_time_seconds = seconds_since(start);
  write_run_json(dir / "run.json", meta);
  return kExitOk;
}

void add_market_options(CLI::App& sub, MarketArgs& a) {
  sub.add_option("--diversity", a.diversity, "Preference diversity d in [0, 1]")->required();
  sub.add_option("--cost", a.cost, "Search cost c (decimal or 1/2^k)")->required();
  sub.add_option("--agents", a.agents, "Number of agents M")->capture_default_str();
  sub.add_option("--alternatives", a.alternatives, "Number of alternatives N")
      ->capture_default_str();
  sub.add_option("--seed", a.seed, "Master seed (fallback: POPMARKET_SEED)");
  sub.add_option("--threshold", a.threshold, "Override the calibrated stopping threshold");
  sub.add_option("--out", a.out, "Output directory")->capture_default_str();
  sub.add_option("--objective-mean", a.objective_mean, "Mean of the shared utility component");
  sub.add_option("--subjective-mean", a.subjective_mean,
                 "Mean of the agent-specific utility component");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo markets with popularity-ordered sequential search", "popmarket"};
  app.require_subcommand(1, 1);

  ThresholdArgs threshold_args;
  auto* threshold = app.add_subcommand("threshold", "Solve the random-search stopping threshold");
  threshold->add_option("--cost", threshold_args.cost, "Search cost c (decimal or 1/2^k)")
      ->required();
  threshold->add_option("--mean", threshold_args.mean, "Mean of total utility")
      ->capture_default_str();
  threshold->add_option("--variance", threshold_args.variance, "Variance of total utility")
      ->capture_default_str();

  MarketArgs run_args;
  auto* run = app.add_subcommand("run", "Run one popularity-ordered market");
  add_market_options(*run, run_args);

  MarketArgs baseline_args;
  auto* baseline = app.add_subcommand("baseline", "Run one random-search market");
  add_market_options(*baseline, baseline_args);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Run the diversity x cost sweep");
  sweep->add_option("--diversity-grid", sweep_args.diversity_grid,
                    "Comma-separated diversity values (default 0,0.1,...,1)");
  sweep->add_option("--cost-grid", sweep_args.cost_grid,
                    "Comma-separated costs (default 1/2^2,...,1/2^8)");
  sweep->add_option("--reps", sweep_args.reps, "Replications per cell (default 1000)");
  sweep->add_option("--agents", sweep_args.agents, "Agents per market (default 1000)");
  sweep->add_option("--alternatives", sweep_args.alternatives,
                    "Alternatives per market (default 100)");
  sweep->add_option("--seed", sweep_args.seed, "Master seed (fallback: POPMARKET_SEED)");
  sweep->add_option("--objective-mean", sweep_args.objective_mean);
  sweep->add_option("--subjective-mean", sweep_args.subjective_mean);
  sweep->add_option("--out", sweep_args.out, "Output directory")->capture_default_str();
  sweep->add_flag("--baseline", sweep_args.baseline, "Also run the random-search baseline");
  sweep->add_flag("--positions", sweep_args.positions, "Write positions.csv");
  sweep->add_flag("--per-agent", sweep_args.per_agent, "Write agents.csv");
  sweep->add_option("--threads", sweep_args.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
  sweep->add_option("--config", sweep_args.config, "Flat key = value or JSON run description");

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (threshold->parsed()) return cmd_threshold(threshold_args, out);
    if (run->parsed()) return cmd_market(run_args, Arm::popularity, "run", err);
    if (baseline->parsed()) return cmd_market(baseline_args, Arm::random_baseline, "baseline", err);
    if (sweep->parsed()) return cmd_sweep(sweep_args, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace popmarket
