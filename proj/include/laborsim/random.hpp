#pragma once

#include <cstdint>
#include <random>

namespace laborsim {

// Seeded stream used by every stochastic operation. Draws are built from raw
// mt19937_64 output so sequences do not depend on the standard library's
// distribution implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t next_u64() { return engine_(); }

  /// Seed for sub-stream `index` of `base_seed` (splitmix64 of the hashed base plus index).
  static std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

 private:
  std::mt19937_64 engine_;
};

}  // namespace laborsim
