#pragma once

#include <cstdint>
#include <random>

#include "prevent/field.hpp"

namespace prevent::mpc {

// Deterministic randomness source. All draws go through our own
// rejection sampling so a seed reproduces the same stream on every
// platform, independent of the standard library's distributions.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, bound), bound >= 1.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    std::uint64_t mask = mask_for(bound);
    for (;;) {
      std::uint64_t v = next_u64() & mask;
      if (v < bound) return v;
    }
  }

  // Uniform on [0, Q). Only the all-ones 61-bit pattern gets rejected.
  FieldElement field_element() {
    for (;;) {
      std::uint64_t v = next_u64() >> 3;
      if (v != FieldElement::kModulus) return FieldElement::reduce(v);
    }
  }

  bool coin() { return (next_u64() & 1) != 0; }

  // Uniform on [0, 1) with 53 random bits; workload shaping only.
  double unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed() const { return seed_; }

  // Independent deterministic substream, e.g. one per simulated user.
  SeededRng fork(std::uint64_t stream) const {
    return SeededRng(mix(seed_ ^ mix(stream + 0x9e3779b97f4a7c15ULL)));
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer.
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  static std::uint64_t mask_for(std::uint64_t bound) {
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    return mask;
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace prevent::mpc
