#include "indiff/random.hpp"

namespace indiff {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Stream RngSpec::stream(std::uint64_t path_index, Channel channel) const {
  const std::uint64_t a = splitmix64(master_seed);
  const std::uint64_t b = splitmix64(a ^ splitmix64(path_index));
  const std::uint64_t key = splitmix64(b ^ splitmix64(static_cast<std::uint64_t>(channel) << 56));
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(path_index), static_cast<std::uint32_t>(channel)};
  return Stream(seq);
}

}  // namespace indiff
