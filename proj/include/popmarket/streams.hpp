#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace popmarket {

// SplitMix64 finalizer; a bijection on 64-bit words with full avalanche.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31U);
}

// Counter-based random stream: the i-th output is mix64(key + i * gamma), so a
// stream is fully described by its key and position and never shares state
// with any other stream. Satisfies UniformRandomBitGenerator.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Stream(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
  }

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] constexpr std::uint64_t position() const noexcept { return counter_; }

  friend constexpr bool operator==(const Stream&, const Stream&) = default;

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Which simulation a stream family feeds. The popularity-ordered market and its
// random-search baseline draw from disjoint key spaces.
enum class Arm : std::uint64_t { popularity = 0, random_baseline = 1 };

// Every random stream one replication needs, keyed by
// (master_seed, diversity_index, cost_index, replication, arm) plus a role and
// agent index. Derivation is order-free: any stream can be materialized on any
// worker without touching the others.
class StreamFamily {
 public:
  StreamFamily(std::uint64_t master_seed, std::size_t diversity_index, std::size_t cost_index,
               std::size_t replication, Arm arm = Arm::popularity) noexcept;

  [[nodiscard]] Stream environment() const noexcept;
  [[nodiscard]] Stream agent(std::size_t agent_index) const noexcept;

  [[nodiscard]] std::uint64_t family_key() const noexcept { return family_key_; }

 private:
  std::uint64_t family_key_;
};

[[nodiscard]] StreamFamily derive_streams(std::uint64_t master_seed, std::size_t diversity_index,
                                          std::size_t cost_index, std::size_t replication,
                                          Arm arm = Arm::popularity) noexcept;

// Uniform double in [0, 1) from the top 53 bits of one draw.
[[nodiscard]] inline double to_unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11U) * 0x1.0p-53;
}

}  // namespace popmarket
