#pragma once

#include <cmath>
#include <cstdint>

namespace emkin {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Random substream for one simulated pair, keyed on (seed, pair_id). The
/// draws for a pair do not depend on how pairs are partitioned across workers.
class PairStream {
public:
  PairStream(std::uint64_t seed, std::uint64_t pair_id) noexcept
      : state_(mix64(seed ^ mix64(pair_id + 0x632BE59BD9B4E019ULL))) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Inverse-CDF exponential draw with the given rate.
  double exponential(double rate) noexcept { return -std::log(uniform_open()) / rate; }

private:
  std::uint64_t state_;
};

} // namespace emkin
