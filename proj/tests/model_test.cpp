#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "popmarket/model.hpp"

using namespace popmarket;
using popmarket::testing::mean_of;
using popmarket::testing::sample_variance;

namespace {

MarketConfig config_with(double diversity, std::size_t n) {
  MarketConfig c;
  c.diversity = diversity;
  c.n_alternatives = n;
  return c;
}

}  // namespace

TEST(MarketConfig, VariancesSplitUnitTotal) {
  for (int i = 0; i <= 10; ++i) {
    const auto c = config_with(i / 10.0, 1);
    EXPECT_EQ(c.objective_variance() + c.subjective_variance(), 1.0);
  }
}

TEST(MarketConfig, RejectsInvalidFields) {
  MarketConfig c;
  EXPECT_NO_THROW(c.validate());
  c.diversity = 1.01;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.diversity = -0.01;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = MarketConfig{};
  c.search_cost = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.search_cost = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = MarketConfig{};
  c.n_agents = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = MarketConfig{};
  c.n_alternatives = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(GenerateEnvironment, FullDiversityIsTheMean) {
  Stream s(7);
  const auto env = generate_environment(config_with(1.0, 3), s);
  EXPECT_EQ(env.objective_utilities, (std::vector<double>{0.0, 0.0, 0.0}));
  EXPECT_EQ(s.position(), 0U);
}

TEST(GenerateEnvironment, NoDiversityLooksStandardNormal) {
  Stream fixed(12345);
  const auto env = generate_environment(config_with(0.0, 100), fixed);
  ASSERT_EQ(env.size(), 100U);
  EXPECT_LT(std::abs(mean_of(env.objective_utilities)), 4.0 / std::sqrt(100.0));
  const double v = sample_variance(env.objective_utilities);
  EXPECT_GE(v, 0.6);
  EXPECT_LE(v, 1.5);

  // Over many seeds the bound holds except for rare chi-square tail draws
  // (P(s^2 < 0.6) is about 0.002 with 99 degrees of freedom).
  int within = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Stream s(seed);
    const auto e = generate_environment(config_with(0.0, 100), s);
    const double var = sample_variance(e.objective_utilities);
    within += std::abs(mean_of(e.objective_utilities)) < 0.4 && var >= 0.6 && var <= 1.5;
  }
  EXPECT_GE(within, 490);
}

TEST(GenerateEnvironment, EntrywiseVarianceTracksOneMinusDiversity) {
  const auto config = config_with(0.2, 4);
  std::vector<std::vector<double>> columns(4);
  for (std::size_t rep = 0; rep < 10'000; ++rep) {
    Stream s = derive_streams(99, 0, 0, rep).environment();
    const auto env = generate_environment(config, s);
    for (std::size_t i = 0; i < 4; ++i) columns[i].push_back(env.objective_utilities[i]);
  }
  for (const auto& col : columns) EXPECT_NEAR(sample_variance(col), 0.8, 0.05);
}

TEST(GenerateEnvironment, MomentsConvergeWithinThreeStandardErrors) {
  MarketConfig config = config_with(0.3, 100'000);
  config.objective_mean = 0.5;
  Stream s(2024);
  const auto env = generate_environment(config, s);
  const double n = 100'000.0;
  const double var = 0.7;
  EXPECT_NEAR(mean_of(env.objective_utilities), 0.5, 3.0 * std::sqrt(var / n));
  // SE of the sample variance of a normal: var * sqrt(2 / (n - 1)).
  EXPECT_NEAR(sample_variance(env.objective_utilities), var, 3.0 * var * std::sqrt(2.0 / (n - 1)));
}

TEST(GeneratePreferences, NoDiversityIsConstant) {
  Stream s(1);
  const auto prefs = generate_preferences(config_with(0.0, 5), s);
  EXPECT_EQ(prefs.subjective_utilities, std::vector<double>(5, 0.0));

  auto config = config_with(0.0, 5);
  config.subjective_mean = 0.25;
  const auto shifted = generate_preferences(config, s);
  EXPECT_EQ(shifted.subjective_utilities, std::vector<double>(5, 0.25));
}

TEST(GeneratePreferences, FullDiversityVarianceBound) {
  Stream s(31337);
  const auto prefs = generate_preferences(config_with(1.0, 100), s);
  const double v = sample_variance(prefs.subjective_utilities);
  EXPECT_GE(v, 0.6);
  EXPECT_LE(v, 1.5);
}

TEST(GeneratePreferences, DistinctAgentStreamsDifferEverywhere) {
  const auto family = derive_streams(5, 0, 0, 0);
  Stream a = family.agent(0);
  Stream b = family.agent(1);
  const auto pa = generate_preferences(config_with(0.5, 100), a);
  const auto pb = generate_preferences(config_with(0.5, 100), b);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_NE(pa.subjective_utilities[i], pb.subjective_utilities[i]);
}

TEST(GeneratePreferences, PureFunctionOfStreamState) {
  const auto config = config_with(0.4, 50);
  Stream a(77);
  Stream b(77);
  EXPECT_EQ(generate_preferences(config, a).subjective_utilities,
            generate_preferences(config, b).subjective_utilities);
  EXPECT_EQ(a, b);
  Stream c(78);
  Stream d(78);
  EXPECT_EQ(generate_environment(config, c).objective_utilities,
            generate_environment(config, d).objective_utilities);
}

TEST(AgentUtility, SumsComponents) {
  const Environment env{{1.5}};
  const AgentPreferences prefs{{-0.3}};
  EXPECT_DOUBLE_EQ(agent_utility(env, prefs, 0), 1.2);
  EXPECT_THROW((void)agent_utility(env, prefs, 1), std::out_of_range);
}

TEST(AgentUtility, NoDiversityAddsSubjectiveMean) {
  auto config = config_with(0.0, 20);
  config.subjective_mean = 0.1;
  Stream es(3);
  Stream ps(4);
  const auto env = generate_environment(config, es);
  const auto prefs = generate_preferences(config, ps);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(agent_utility(env, prefs, i), env.objective_utilities[i] + 0.1);
  }
}

TEST(AgentUtility, AgentsDifferBySubjectiveDraws) {
  const auto config = config_with(0.6, 30);
  Stream es(8);
  const auto env = generate_environment(config, es);
  Stream s1(9);
  Stream s2(10);
  const auto p1 = generate_preferences(config, s1);
  const auto p2 = generate_preferences(config, s2);
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_NEAR(agent_utility(env, p1, i) - agent_utility(env, p2, i),
                p1.subjective_utilities[i] - p2.subjective_utilities[i], 1e-15);
  }
}

TEST(AgentUtility, AdditiveInOneEntry) {
  const Environment env{{0.3, -0.2, 1.0}};
  AgentPreferences prefs{{0.1, 0.2, 0.3}};
  const double before[] = {agent_utility(env, prefs, 0), agent_utility(env, prefs, 1),
                           agent_utility(env, prefs, 2)};
  prefs.subjective_utilities[1] += 0.5;
  EXPECT_EQ(agent_utility(env, prefs, 0), before[0]);
  EXPECT_DOUBLE_EQ(agent_utility(env, prefs, 1), before[1] + 0.5);
  EXPECT_EQ(agent_utility(env, prefs, 2), before[2]);
}

TEST(PopularityVector, CountsOnlyIncreaseByOne) {
  PopularityVector p(3);
  p.record_choice(2);
  p.record_choice(2);
  p.record_choice(0);
  EXPECT_EQ(p.counts(), (std::vector<std::uint64_t>{1, 0, 2}));
  EXPECT_EQ(p.total(), 3U);
  EXPECT_THROW(p.record_choice(3), std::out_of_range);
  EXPECT_EQ(p.total(), 3U);
}
