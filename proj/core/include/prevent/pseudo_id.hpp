#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>

#include "prevent/rng.hpp"

namespace prevent {

// Opaque subscriber-issued 128-bit token. One token accompanies one
// stay-point message set and is never reused.
struct PseudoId {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  auto operator<=>(const PseudoId&) const = default;

  std::string to_hex() const;
  static PseudoId from_hex(const std::string& hex);
  static PseudoId draw(mpc::SeededRng& rng) {
    return PseudoId{rng.next_u64(), rng.next_u64()};
  }
};

struct PseudoIdHash {
  std::size_t operator()(const PseudoId& id) const {
    return static_cast<std::size_t>(id.lo ^ (id.hi * 0x9e3779b97f4a7c15ULL));
  }
};

}  // namespace prevent
