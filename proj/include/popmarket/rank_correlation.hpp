#pragma once

#include <span>

namespace popmarket {

// Kendall's tau-b with tie correction, O(n log n) (Knight's merge-sort method).
// Returns 0 when either input is constant, where tau-b is undefined.
// Throws std::invalid_argument on length mismatch.
[[nodiscard]] double kendall_tau_b(std::span<const double> x, std::span<const double> y);

// Same statistic with x = 0, 1, ..., n-1: the rank agreement between sequence
// position and value. Skips the initial sort.
[[nodiscard]] double kendall_tau_b_with_position(std::span<const double> values);

}  // namespace popmarket
