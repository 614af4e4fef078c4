#include "popmarket/streams.hpp"

namespace popmarket {

namespace {

// Distinct salts per key field so that permuting field values cannot alias.
constexpr std::uint64_t kSaltDiversity = 0x243f6a8885a308d3ULL;
constexpr std::uint64_t kSaltCost = 0x13198a2e03707344ULL;
constexpr std::uint64_t kSaltReplication = 0xa4093822299f31d0ULL;
constexpr std::uint64_t kSaltArm = 0x082efa98ec4e6c89ULL;
constexpr std::uint64_t kSaltRole = 0x452821e638d01377ULL;
constexpr std::uint64_t kSaltAgent = 0xbe5466cf34e90c6cULL;

constexpr std::uint64_t absorb(std::uint64_t state, std::uint64_t value,
                               std::uint64_t salt) noexcept {
  return mix64(state ^ mix64(value + salt));
}

enum class Role : std::uint64_t { environment = 1, agent = 2 };

}  // namespace

StreamFamily::StreamFamily(std::uint64_t master_seed, std::size_t diversity_index,
                           std::size_t cost_index, std::size_t replication, Arm arm) noexcept {
  std::uint64_t k = mix64(master_seed);
  k = absorb(k, diversity_index, kSaltDiversity);
  k = absorb(k, cost_index, kSaltCost);
  k = absorb(k, replication, kSaltReplication);
  k = absorb(k, static_cast<std::uint64_t>(arm), kSaltArm);
  family_key_ = k;
}

Stream StreamFamily::environment() const noexcept {
  return Stream{absorb(family_key_, static_cast<std::uint64_t>(Role::environment), kSaltRole)};
}

Stream StreamFamily::agent(std::size_t agent_index) const noexcept {
  const std::uint64_t k =
      absorb(family_key_, static_cast<std::uint64_t>(Role::agent), kSaltRole);
  return Stream{absorb(k, agent_index, kSaltAgent)};
}

StreamFamily derive_streams(std::uint64_t master_seed, std::size_t diversity_index,
                            std::size_t cost_index, std::size_t replication, Arm arm) noexcept {
  return StreamFamily{master_seed, diversity_index, cost_index, replication, arm};
}

}  // namespace popmarket
