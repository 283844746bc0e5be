#include "laborsim/random.hpp"

namespace laborsim {

std::uint64_t RandomStream::below(std::uint64_t bound) {
  // Rejection on the low residue keeps the draw unbiased.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine_();
    if (r >= threshold) return r % bound;
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RandomStream::derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  // Hashing the base first keeps (base, index) and (base + 1, index - 1) apart.
  return splitmix64(splitmix64(base_seed) + index);
}

}  // namespace laborsim
