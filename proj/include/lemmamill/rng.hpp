#pragma once

// Deterministic pseudo-random numbers (splitmix64). The standard <random>
// engines are portable but the distributions are not pinned across library
// implementations, and byte-identical output across runs and machines is a
// hard requirement, so the few draws we need are implemented directly.

#include <cstdint>

namespace lemmamill {

struct Rng {
  std::uint64_t state = 0;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform-enough draw in [0, n); n must be positive. The tiny modulo bias
  // is irrelevant here, determinism is what matters.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  std::int64_t intIn(std::int64_t lo, std::int64_t hi) {
    return lo + std::int64_t(below(std::uint64_t(hi - lo + 1)));
  }

  double unitDouble() { return double(next() >> 11) * 0x1.0p-53; }

  // Stable combination of a seed with a stream index, for independent
  // substreams (restarts, samples, variables).
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

}  // namespace lemmamill
