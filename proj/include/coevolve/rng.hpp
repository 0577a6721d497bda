#pragma once

#include <cstdint>
#include <string_view>

namespace coevolve {

/// Counter-based generator: draw k of stream s is
/// splitmix64_mix(seed ^ stream_key(s) + (k + 1) * golden_gamma).
/// Any draw can be recomputed from (seed, stream, counter) alone, which keeps
/// sampled experiments reproducible independently of call order across
/// blocks.
class CounterRng {
 public:
  static constexpr std::string_view name = "splitmix64-counter";

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal via Box-Muller (the sine branch is discarded so each
  /// draw consumes exactly two counters).
  double normal() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

}  // namespace coevolve
