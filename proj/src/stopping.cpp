#include "popmarket/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace popmarket {

double normal_pdf(double z) noexcept {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_upper_tail(double z) noexcept { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double expected_excess(const GaussianSpec& spec, double threshold) {
  if (!(spec.variance >= 0.0) || !std::isfinite(spec.variance)) {
    throw std::invalid_argument("variance must be finite and non-negative");
  }
  if (spec.variance == 0.0) return std::max(spec.mean - threshold, 0.0);
  const double sigma = std::sqrt(spec.variance);
  const double z = (threshold - spec.mean) / sigma;
  // Past z ~ 38 the density underflows and the excess is exactly zero in double.
  return sigma * std::max(normal_pdf(z) - z * normal_upper_tail(z), 0.0);
}

namespace {

// d/dT of expected_excess: -(1 - Phi(z)).
double excess_slope(const GaussianSpec& spec, double threshold) {
  const double sigma = std::sqrt(spec.variance);
  return -normal_upper_tail((threshold - spec.mean) / sigma);
}

}  // namespace

ThresholdSolution solve_threshold(const GaussianSpec& spec, double cost) {
  if (!std::isfinite(cost) || !(cost > 0.0)) {
    throw std::invalid_argument("cost must be a positive finite number, got " +
                                std::to_string(cost));
  }
  if (!(spec.variance > 0.0) || !std::isfinite(spec.variance) || !std::isfinite(spec.mean)) {
    throw std::invalid_argument("threshold solving needs a finite mean and positive variance");
  }

  const auto residual_at = [&](double t) { return expected_excess(spec, t) - cost; };

  // residual is strictly decreasing in t: positive on the left, negative on the right.
  double lo = spec.mean - 10.0;
  double hi = spec.mean + 10.0;
  for (double width = 10.0; residual_at(lo) <= 0.0; width *= 2.0) lo = spec.mean - 2.0 * width;
  for (double width = 10.0; residual_at(hi) >= 0.0; width *= 2.0) {
    hi = spec.mean + 2.0 * width;
    if (!std::isfinite(hi)) throw std::invalid_argument("cost too small to bracket a threshold");
  }

  // Coarse bisection, then Newton. Any Newton step leaving the bracket falls
  // back to bisection.
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    (residual_at(mid) > 0.0 ? lo : hi) = mid;
  }
  double t = 0.5 * (lo + hi);
  double r = residual_at(t);
  for (int iter = 0; iter < 200 && std::abs(r) > kThresholdTolerance * 1e-2; ++iter) {
    (r > 0.0 ? lo : hi) = t;
    const double slope = excess_slope(spec, t);
    double next = slope < 0.0 ? t - r / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t) break;
    t = next;
    r = residual_at(t);
  }

  const double residual = std::abs(r);
  if (!(residual <= kThresholdTolerance)) {
    throw std::runtime_error("threshold solver did not converge for cost " +
                             std::to_string(cost));
  }
  return ThresholdSolution{t, cost, residual};
}

GaussianSpec total_utility_spec(const MarketConfig& config) noexcept {
  return GaussianSpec{config.objective_mean + config.subjective_mean,
                      config.objective_variance() + config.subjective_variance()};
}

ThresholdSolution calibrate_threshold(MarketConfig& config) {
  const auto solution = solve_threshold(total_utility_spec(config), config.search_cost);
  config.threshold = solution.threshold;
  return solution;
}

}  // namespace popmarket
