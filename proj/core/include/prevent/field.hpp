#pragma once

#include <cstdint>

namespace prevent::mpc {

// One element of the prime field Z_Q with Q = 2^61 - 1 (Mersenne).
// Every server-side value in the system is one of these; reduction
// exploits 2^61 = 1 (mod Q) so no division is ever executed.
class FieldElement {
 public:
  static constexpr std::uint64_t kModulus = (1ULL << 61) - 1;

  constexpr FieldElement() = default;

  // Accepts any 64-bit value and folds it into [0, Q).
  static constexpr FieldElement reduce(std::uint64_t v) {
    v = (v & kModulus) + (v >> 61);
    if (v >= kModulus) v -= kModulus;
    return FieldElement(v);
  }

  // Signed integers map to Q - |v| when negative.
  static constexpr FieldElement from_signed(std::int64_t v) {
    if (v >= 0) return reduce(static_cast<std::uint64_t>(v));
    std::uint64_t magnitude = static_cast<std::uint64_t>(-(v + 1)) + 1;
    return reduce(magnitude).negated();
  }

  constexpr std::uint64_t value() const { return value_; }

  constexpr FieldElement operator+(FieldElement other) const {
    std::uint64_t s = value_ + other.value_;
    if (s >= kModulus) s -= kModulus;
    return FieldElement(s);
  }

  constexpr FieldElement operator-(FieldElement other) const {
    return FieldElement(value_ >= other.value_
                            ? value_ - other.value_
                            : value_ + kModulus - other.value_);
  }

  constexpr FieldElement operator*(FieldElement other) const {
    unsigned __int128 t =
        static_cast<unsigned __int128>(value_) * other.value_;
    // a, b < 2^61 so t < 2^122; two folds land in [0, Q).
    std::uint64_t lo = static_cast<std::uint64_t>(t & kModulus);
    std::uint64_t hi = static_cast<std::uint64_t>(t >> 61);
    std::uint64_t s = lo + (hi & kModulus) + (hi >> 61);
    s = (s & kModulus) + (s >> 61);
    if (s >= kModulus) s -= kModulus;
    return FieldElement(s);
  }

  constexpr FieldElement negated() const {
    return FieldElement(value_ == 0 ? 0 : kModulus - value_);
  }

  constexpr FieldElement& operator+=(FieldElement other) {
    *this = *this + other;
    return *this;
  }
  constexpr FieldElement& operator-=(FieldElement other) {
    *this = *this - other;
    return *this;
  }

  constexpr bool operator==(const FieldElement&) const = default;

  constexpr bool is_zero() const { return value_ == 0; }

 private:
  constexpr explicit FieldElement(std::uint64_t v) : value_(v) {}

  std::uint64_t value_ = 0;
};

}  // namespace prevent::mpc
