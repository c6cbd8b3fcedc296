#include "doctest.h"
#include "prevent/field.hpp"
#include "prevent/rng.hpp"

using prevent::mpc::FieldElement;
using prevent::mpc::SeededRng;

namespace {

constexpr unsigned __int128 kQ = FieldElement::kModulus;

std::uint64_t mod_mul(std::uint64_t a, std::uint64_t b) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % kQ);
}

}  // namespace

TEST_CASE("field reduction folds any 64-bit value") {
  CHECK(FieldElement::reduce(0).value() == 0);
  CHECK(FieldElement::reduce(FieldElement::kModulus).value() == 0);
  CHECK(FieldElement::reduce(FieldElement::kModulus + 5).value() == 5);
  CHECK(FieldElement::reduce(UINT64_MAX).value() ==
        UINT64_MAX % FieldElement::kModulus);

  SeededRng rng(7);
  for (int i = 0; i < 20000; ++i) {
    const std::uint64_t v = rng.next_u64();
    CHECK(FieldElement::reduce(v).value() == v % FieldElement::kModulus);
  }
}

TEST_CASE("field arithmetic matches 128-bit reference") {
  SeededRng rng(11);
  for (int i = 0; i < 20000; ++i) {
    const FieldElement a = rng.field_element();
    const FieldElement b = rng.field_element();
    CHECK((a + b).value() == (a.value() + b.value()) % FieldElement::kModulus);
    CHECK((a - b).value() == (a.value() + FieldElement::kModulus - b.value()) %
                                 FieldElement::kModulus);
    CHECK((a * b).value() == mod_mul(a.value(), b.value()));
  }
}

TEST_CASE("signed conversion wraps negatives") {
  CHECK(FieldElement::from_signed(-1).value() == FieldElement::kModulus - 1);
  CHECK(FieldElement::from_signed(0).value() == 0);
  CHECK(FieldElement::from_signed(42).value() == 42);
  CHECK(FieldElement::from_signed(-42) + FieldElement::from_signed(42) ==
        FieldElement{});

  // Squaring a negative equals squaring its magnitude.
  const FieldElement d = FieldElement::from_signed(-12345);
  CHECK((d * d).value() == 12345ULL * 12345ULL);
}

TEST_CASE("negation and zero behave") {
  CHECK(FieldElement{}.negated().value() == 0);
  const FieldElement v = FieldElement::reduce(99);
  CHECK((v + v.negated()).value() == 0);
  CHECK(v.is_zero() == false);
  CHECK(FieldElement{}.is_zero());
}
