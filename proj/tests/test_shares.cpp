#include <vector>

#include "doctest.h"
#include "prevent/errors.hpp"
#include "prevent/experiments.hpp"
#include "prevent/shares.hpp"

using namespace prevent;
using mpc::FieldElement;
using mpc::SeededRng;
using mpc::Share;
using mpc::SharedValue;

TEST_CASE("sharing zero reconstructs to zero") {
  SeededRng rng(1);
  CHECK(mpc::reconstruct(mpc::share(FieldElement{}, 3, rng)).value() == 0);
}

TEST_CASE("share/reconstruct round-trips for random values and counts") {
  SeededRng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const FieldElement v = rng.field_element();
    const std::uint32_t n = 2 + static_cast<std::uint32_t>(rng.below(4));
    CHECK(mpc::reconstruct(mpc::share(v, n, rng)) == v);
  }
}

TEST_CASE("small reconstruction sums") {
  SharedValue v(2);
  v[0] = FieldElement::reduce(5);
  v[1] = FieldElement::reduce(7);
  CHECK(mpc::reconstruct(v).value() == 12);

  v[0] = FieldElement::reduce(FieldElement::kModulus - 1);
  v[1] = FieldElement::reduce(1);
  CHECK(mpc::reconstruct(v).value() == 0);
}

TEST_CASE("party count below two is refused") {
  SeededRng rng(3);
  CHECK_THROWS_AS(mpc::share(FieldElement::reduce(9), 1, rng),
                  InvalidPartyCount);
  CHECK_THROWS_AS(mpc::share(FieldElement::reduce(9), 0, rng),
                  InvalidPartyCount);
}

TEST_CASE("labelled share sets must cover every party exactly once") {
  SeededRng rng(4);
  const SharedValue v = mpc::share(FieldElement::reduce(77), 3, rng);
  std::vector<Share> shares = v.to_shares();
  CHECK(mpc::reconstruct(shares).value() == 77);

  shares[1].owner = 0;  // party 1 missing, party 0 twice
  CHECK_THROWS_AS(mpc::reconstruct(shares), IncompleteShareSet);

  std::vector<Share> short_set(shares.begin(), shares.begin() + 2);
  CHECK_THROWS_AS(mpc::reconstruct(short_set), IncompleteShareSet);
}

TEST_CASE("first share is uniform over fresh randomness") {
  SeededRng rng(5);
  const FieldElement secret = FieldElement::reduce(123456789);
  std::vector<FieldElement> first;
  first.reserve(100000);
  for (int i = 0; i < 100000; ++i) {
    first.push_back(mpc::share(secret, 3, rng)[0]);
  }
  const harness::ChiSquare chi = harness::chi_square_uniformity(first);
  CHECK(chi.pass);
}

TEST_CASE("local share arithmetic tracks the hidden values") {
  SeededRng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const FieldElement a = rng.field_element();
    const FieldElement b = rng.field_element();
    const FieldElement k = rng.field_element();
    const SharedValue sa = mpc::share(a, 3, rng);
    const SharedValue sb = mpc::share(b, 3, rng);
    CHECK(mpc::reconstruct(mpc::add(sa, sb)) == a + b);
    CHECK(mpc::reconstruct(mpc::sub(sa, sb)) == a - b);
    CHECK(mpc::reconstruct(mpc::add_public(sa, k)) == a + k);
    CHECK(mpc::reconstruct(mpc::sub_public(sa, k)) == a - k);
    CHECK(mpc::reconstruct(mpc::public_minus(k, sa)) == k - a);
    CHECK(mpc::reconstruct(mpc::scale(sa, k)) == a * k);
  }
}
