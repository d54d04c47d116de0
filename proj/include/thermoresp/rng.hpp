#pragma once

#include <cstdint>

// Counter-based random numbers. Every draw is a pure function of a 64-bit
// key, so any pixel of any frame can be regenerated independently of
// rendering order. Algorithm: SplitMix64 finalizer for hashing, 53-bit
// mantissa uniforms on (0, 1), Box-Muller (cosine branch) for normals.

namespace thermoresp::rng {

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                               std::uint64_t b = 0, std::uint64_t c = 0) noexcept {
  return mix64(mix64(mix64(mix64(seed) ^ a) ^ b) ^ c);
}

/// Uniform on the open interval (0, 1).
double uniform01(std::uint64_t key) noexcept;

double standard_normal(std::uint64_t key) noexcept;

/// Sequential stream over the same primitives, for places where draw order
/// is naturally fixed (weight init, corpus parameter sampling).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept { return mix64(state_++); }
  double uniform() noexcept { return uniform01(next()); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept { return standard_normal(next()); }

 private:
  std::uint64_t state_;
};

}  // namespace thermoresp::rng
