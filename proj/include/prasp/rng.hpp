#pragma once

#include <cstdint>

namespace prasp {

inline constexpr uint64_t kDefaultSeed = 1;

// splitmix64: small, fast, and bit-reproducible across platforms, which the
// deterministic-output guarantee relies on. Do not swap for std::mt19937 or
// libc rand without revisiting that guarantee.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed = kDefaultSeed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1) with 53 random bits
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  // uniform in {0, ..., n-1}; modulo bias is irrelevant at our sample sizes
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }
};

}  // namespace prasp
