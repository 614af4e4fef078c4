#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "popmarket/output.hpp"

using namespace popmarket;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("popmarket_output_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AggregateRecord sample_record() {
  AggregateRecord r;
  r.diversity = 0.2;
  r.cost = 0.125;
  r.threshold = 0.7777186237854039;
  r.mean_gross = 1.5596697179432062;
  r.mean_net = 1.4137259679432057;
  r.mean_total_cost = 0.14594374999999998;
  r.sd_net_across_reps = 0.27687187719696027;
  r.mean_samples = 1.1675499999999999;
  r.mean_final_path_quality = 0.059959595959595956;
  r.n_replications = 20;
  return r;
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(0.125), "0.125");
  EXPECT_EQ(format_double(0.0), "0");
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int i = 0; i < 10'000; ++i) {
    const double v = std::bit_cast<double>(bits(rng));
    if (!std::isfinite(v)) continue;
    ASSERT_EQ(parse_double(format_double(v)), v);
  }
}

TEST(ParseCost, DecimalFractionAndPower) {
  EXPECT_EQ(parse_cost("0.125"), 0.125);
  EXPECT_EQ(parse_cost("1/2^3"), 0.125);
  EXPECT_EQ(parse_cost(" 1/8 "), 0.125);
  EXPECT_EQ(parse_cost("1/2^8"), 1.0 / 256.0);
  EXPECT_THROW((void)parse_cost("0"), std::invalid_argument);
  EXPECT_THROW((void)parse_cost("-0.5"), std::invalid_argument);
  EXPECT_THROW((void)parse_cost("1/0"), std::invalid_argument);
  EXPECT_THROW((void)parse_cost("abc"), std::invalid_argument);
  EXPECT_THROW((void)parse_cost("0.1x"), std::invalid_argument);
  EXPECT_EQ(parse_cost_list("1/2^2,1/2^3,0.0625"), (std::vector<double>{0.25, 0.125, 0.0625}));
  EXPECT_THROW((void)parse_cost_list("0.25,,0.1"), std::invalid_argument);
}

TEST(AggregateCsv, HeaderAndOneRow) {
  const auto dir = scratch_dir("one_row");
  write_aggregate_csv(dir / "aggregate.csv", {sample_record()});
  std::ifstream in(dir / "aggregate.csv");
  std::string header;
  std::string row;
  std::string extra;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_FALSE(std::getline(in, extra));
  EXPECT_EQ(header, kAggregateHeader);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 10);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 10);
  EXPECT_EQ(row.substr(0, 10), "0.2,0.125,");
  EXPECT_EQ(row.substr(row.size() - 5), ",20,0");
}

TEST(AggregateCsv, ReadBackReproducesValues) {
  const auto dir = scratch_dir("round_trip");
  auto a = sample_record();
  auto b = sample_record();
  b.baseline = true;
  b.mean_net = -0.3333333333333333;
  auto c = sample_record();
  c.diversity = 0.0;
  write_aggregate_csv(dir / "aggregate.csv", {b, a, c});
  const auto back = read_aggregate_csv(dir / "aggregate.csv");
  EXPECT_EQ(back, (std::vector<AggregateRecord>{c, a, b}));
}

TEST(AggregateCsv, RerunIsByteIdentical) {
  const auto dir = scratch_dir("bytes");
  SweepConfig s;
  s.diversity_grid = {0.0, 0.3};
  s.cost_grid = {0.25};
  s.replications = 3;
  s.n_agents = 20;
  s.n_alternatives = 10;
  write_aggregate_csv(dir / "a.csv", run_sweep(s));
  write_aggregate_csv(dir / "b.csv", run_sweep(s));
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
}

TEST(AggregateCsv, UnwritablePathIsNamed) {
  try {
    write_aggregate_csv("/nonexistent-dir/aggregate.csv", {sample_record()});
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/aggregate.csv"), std::string::npos);
  }
}

TEST(PositionsCsv, SortedRows) {
  const auto dir = scratch_dir("positions");
  PositionRecord p1{0.2, 0.125, 2, 1.0, 0.9, 1.0, 0.1};
  PositionRecord p2{0.2, 0.125, 1, 1.1, 0.8, 2.0, 0.0};
  PositionRecord p3{0.0, 0.25, 1, 1.2, 0.7, 3.0, -0.5};
  write_positions_csv(dir / "positions.csv", {p1, p2, p3});
  EXPECT_EQ(slurp(dir / "positions.csv"),
            std::string(kPositionsHeader) +
                "\n0,0.25,1,1.2,0.7,3,-0.5\n0.2,0.125,1,1.1,0.8,2,0\n0.2,0.125,2,1,0.9,1,0.1\n");
}

TEST(AgentCsv, OneRowPerAgent) {
  const auto dir = scratch_dir("agents");
  MarketConfig config;
  config.diversity = 0.5;
  config.search_cost = 0.25;
  MarketResult r;
  r.outcomes = {{3, 2, 1.5, 1.0}, {3, 1, 1.25, 1.0}};
  AgentCsvWriter w(dir / "agents.csv");
  w.write(config, 7, r);
  w.close();
  EXPECT_EQ(slurp(dir / "agents.csv"),
            std::string(kAgentsHeader) + "\n0.5,0.25,7,1,3,2,1.5,1\n0.5,0.25,7,2,3,1,1.25,1\n");
}

TEST(ConfigFile, KeyValueLines) {
  const auto dir = scratch_dir("config_kv");
  {
    std::ofstream out(dir / "run.cfg");
    out << "# desk scale\n"
           "diversity_grid = 0, 0.2, 1\n"
           "cost_grid = 1/2^3\n"
           "replications = 200\n"
           "master_seed = 18446744073709551615\n"
           "include_baseline = true\n";
  }
  SweepConfig s;
  const auto keys = apply_config_file(dir / "run.cfg", s);
  EXPECT_EQ(keys.size(), 5U);
  EXPECT_EQ(s.diversity_grid, (std::vector<double>{0.0, 0.2, 1.0}));
  EXPECT_EQ(s.cost_grid, (std::vector<double>{0.125}));
  EXPECT_EQ(s.replications, 200U);
  EXPECT_EQ(s.master_seed, 18446744073709551615ULL);
  EXPECT_TRUE(s.include_baseline);
  EXPECT_EQ(s.n_agents, 1000U);
}

TEST(ConfigFile, RunJsonRoundTrip) {
  const auto dir = scratch_dir("config_json");
  RunMetadata meta;
  meta.command = "sweep";
  meta.sweep.diversity_grid = {0.1, 0.7};
  meta.sweep.cost_grid = {0.03125};
  meta.sweep.replications = 3;
  meta.sweep.n_agents = 17;
  meta.sweep.n_alternatives = 9;
  meta.sweep.master_seed = 123456789012345ULL;
  meta.sweep.objective_mean = 0.25;
  write_run_json(dir / "run.json", meta);
  SweepConfig s;
  (void)apply_config_file(dir / "run.json", s);
  EXPECT_EQ(s, meta.sweep);
}

TEST(ConfigFile, UnknownKeyRejected) {
  const auto dir = scratch_dir("config_bad");
  {
    std::ofstream out(dir / "bad.cfg");
    out << "replicates = 3\n";
  }
  SweepConfig s;
  EXPECT_THROW((void)apply_config_file(dir / "bad.cfg", s), std::invalid_argument);
}
