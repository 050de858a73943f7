#pragma once

#include <cstdint>

namespace repread {

/// SplitMix64 generator. The output stream is a pure function of the seed,
/// so shuffles and synthetic data reproduce bit-for-bit on every platform.
class Rng64 {
 public:
  explicit Rng64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in (0, 1): 53 high bits, zero remapped to 2^-53.
  double uniform() noexcept;

  /// Standard normal via Box-Muller (cosine branch). Consumes two outputs
  /// per call; nothing is cached between calls.
  double gaussian() noexcept;

  /// Uniform index in [0, bound) by modulo reduction. bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept { return next() % bound; }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace repread
