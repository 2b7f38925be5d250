// SPDX-License-Identifier: MIT
//
// rng.hpp -- deterministic random number generation for sampling experiments.
//
// Reproducibility contract: identical (seed, draw sequence) yields identical
// bits on every platform.  The standard library distributions are
// implementation-defined, so everything here is hand-pinned on top of the
// SplitMix64 mixer (Steele, Lea & Flood; the java.util.SplittableRandom
// finalizer).  Per-trial streams are derived by hashing (master_seed, index),
// so parallel or reordered trial execution can never change results.

#pragma once

#include <cstdint>

namespace rmtlab {

// SplitMix64: 64-bit state, one mixing round per output.  Passes BigCrush as
// a building block and is trivially seedable from any 64-bit value.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform double in [-1, 1).
  double next_symmetric() { return 2.0 * next_double() - 1.0; }

  // Rademacher sign (+1 or -1 with probability 1/2 each).
  double next_sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

  // Uniform integer in [0, bound) via bitmask rejection (no modulo bias).
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      const std::uint64_t r = next_u64() & mask;
      if (r < bound) return r;
    }
  }

 private:
  std::uint64_t state_;
};

// Stream derivation: hash the pair (master, index) through two SplitMix64
// rounds.  Streams for distinct indices are independent for all practical
// purposes, and the derivation itself is order-free.
inline std::uint64_t derive_stream(std::uint64_t master, std::uint64_t index) {
  SplitMix64 g(master ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
  g.next_u64();
  return g.next_u64();
}

}  // namespace rmtlab
