#pragma once

#include <cstdint>
#include <random>

namespace indiff {

/// Independent noise sources of one simulated path. Hazard noise lives on
/// its own channel so the insurance market stays independent of the
/// financial one.
enum class Channel : std::uint64_t {
  StockBrownian = 1,
  HazardBrownian = 2,
  JumpUp = 3,
  JumpDown = 4,
  Chain = 5,
};

using Stream = std::mt19937_64;

/// Counter-based stream derivation: the stream for (path, channel) depends
/// only on the master seed and those two counters, never on scheduling.
struct RngSpec {
  std::uint64_t master_seed = 20240607;

  Stream stream(std::uint64_t path_index, Channel channel) const;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace indiff
