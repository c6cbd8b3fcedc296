#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "prevent/shares.hpp"

namespace prevent::mpc {

inline constexpr unsigned kFieldBits = 61;

// Multiplication material: shared (a, b, c) with c = a*b mod Q.
// Each triple feeds exactly one secure multiplication.
struct BeaverTriple {
  SharedValue a, b, c;
  bool used = false;
};

// Comparison material: a uniform mask r together with shares of each
// of its 61 bits. The bits are what let the parties undo the modular
// wraparound of a masked opening without learning the mask.
struct ComparisonMask {
  SharedValue mask;
  std::vector<SharedValue> mask_bits;  // index = bit position, LSB first
  bool used = false;
};

// Simulated trusted dealer for the semi-honest model: a deterministic,
// seeded source of correlated randomness. Same seed, same material.
class Dealer {
 public:
  Dealer(std::uint32_t parties, std::uint64_t seed);

  std::uint32_t parties() const { return parties_; }

  BeaverTriple make_triple();
  std::vector<BeaverTriple> make_triples(std::size_t count);

  // Shares of a uniform value no single party can determine.
  SharedValue make_hidden_random();

  ComparisonMask make_comparison_mask();
  std::vector<ComparisonMask> make_comparison_masks(std::size_t count);

 private:
  std::uint32_t parties_;
  SeededRng rng_;
};

// Replayable preprocessing files: a length prefix followed by raw
// field elements, every word little-endian 8 bytes.
std::vector<std::uint8_t> serialize_triples(std::span<const BeaverTriple> ts);
std::vector<BeaverTriple> deserialize_triples(std::span<const std::uint8_t> b,
                                              std::uint32_t parties);
std::vector<std::uint8_t> serialize_masks(std::span<const ComparisonMask> ms);
std::vector<ComparisonMask> deserialize_masks(std::span<const std::uint8_t> b,
                                              std::uint32_t parties);

}  // namespace prevent::mpc
