#pragma once

#include "popmarket/model.hpp"

namespace popmarket {

struct GaussianSpec {
  double mean = 0.0;
  double variance = 1.0;
};

struct ThresholdSolution {
  double threshold = 0.0;
  double cost = 0.0;
  // |expected_excess(threshold) - cost| at the returned threshold.
  double residual = 0.0;
};

inline constexpr double kThresholdTolerance = 1e-10;

// Standard normal density and upper tail 1 - Phi(z), the latter via erfc so it
// keeps full relative precision far into the tail.
[[nodiscard]] double normal_pdf(double z) noexcept;
[[nodiscard]] double normal_upper_tail(double z) noexcept;

// E[(U - threshold)^+] for U ~ Normal(mean, variance): the expected gain from
// one more draw when the best value in hand equals `threshold`.
//
// Closed form sigma * (pdf(z) - z * upper_tail(z)) with z = (threshold - mean) / sigma.
// Zero variance degenerates to max(mean - threshold, 0). Throws
// std::invalid_argument for negative or non-finite variance.
[[nodiscard]] double expected_excess(const GaussianSpec& spec, double threshold);

// Reservation value for random search: the unique T with expected_excess(T) == cost.
// Bisection on a bracket grown from [-10, 10], then safeguarded Newton until the
// residual is at most kThresholdTolerance. Throws std::invalid_argument when
// cost is not a positive finite number or the variance is not positive.
[[nodiscard]] ThresholdSolution solve_threshold(const GaussianSpec& spec, double cost);

// Distribution of an agent's total utility under `config`.
[[nodiscard]] GaussianSpec total_utility_spec(const MarketConfig& config) noexcept;

// Sets config.threshold to the random-search optimum for config.search_cost.
ThresholdSolution calibrate_threshold(MarketConfig& config);

}  // namespace popmarket
