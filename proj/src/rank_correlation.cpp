#include "popmarket/rank_correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace popmarket {

namespace {

// Pairs inside runs of equal values in an already sorted sequence.
template <typename Equal>
std::uint64_t tied_pairs(std::size_t n, Equal&& equal) {
  std::uint64_t ties = 0;
  std::uint64_t run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (equal(i - 1, i)) {
      ++run;
    } else {
      ties += run * (run - 1) / 2;
      run = 1;
    }
  }
  return ties + run * (run - 1) / 2;
}

// Stable bottom-up merge sort of `values`, returning the number of strict inversions.
std::uint64_t sort_counting_inversions(std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<double> buffer(n);
  std::uint64_t swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo;
      std::size_t j = mid;
      std::size_t k = lo;
      while (i < mid && j < hi) {
        if (values[j] < values[i]) {
          swaps += mid - i;
          buffer[k++] = values[j++];
        } else {
          buffer[k++] = values[i++];
        }
      }
      while (i < mid) buffer[k++] = values[i++];
      while (j < hi) buffer[k++] = values[j++];
    }
    values.swap(buffer);
  }
  return swaps;
}

}  // namespace

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("kendall_tau_b: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  const std::uint64_t x_ties =
      tied_pairs(n, [&](std::size_t a, std::size_t b) { return x[order[a]] == x[order[b]]; });
  const std::uint64_t joint_ties = tied_pairs(n, [&](std::size_t a, std::size_t b) {
    return x[order[a]] == x[order[b]] && y[order[a]] == y[order[b]];
  });

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::uint64_t discordant = sort_counting_inversions(ys);
  const std::uint64_t y_ties =
      tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });

  const auto total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (x_ties == total || y_ties == total) return 0.0;

  const double con_minus_dis = static_cast<double>(total) - static_cast<double>(x_ties) -
                               static_cast<double>(y_ties) + static_cast<double>(joint_ties) -
                               2.0 * static_cast<double>(discordant);
  return con_minus_dis / std::sqrt(static_cast<double>(total - x_ties) *
                                   static_cast<double>(total - y_ties));
}

double kendall_tau_b_with_position(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  std::vector<double> ys(values.begin(), values.end());
  const std::uint64_t discordant = sort_counting_inversions(ys);
  const std::uint64_t y_ties =
      tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });
  const auto total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (y_ties == total) return 0.0;
  const double con_minus_dis = static_cast<double>(total) - static_cast<double>(y_ties) -
                               2.0 * static_cast<double>(discordant);
  return con_minus_dis /
         std::sqrt(static_cast<double>(total) * static_cast<double>(total - y_ties));
}

}  // namespace popmarket
