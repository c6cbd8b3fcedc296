#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "prevent/errors.hpp"
#include "prevent/field.hpp"
#include "prevent/rng.hpp"

namespace prevent::mpc {

using PartyId = std::uint32_t;

// One additive share of a secret, tagged with the party that holds it.
// A full set of n shares satisfies sum(values) = secret (mod Q).
struct Share {
  PartyId owner = 0;
  FieldElement value;
};

// A secret in shared form: one field element per party, index = owner.
// This is the working representation inside protocols; `Share` is the
// boundary representation used in messages and dealer files.
class SharedValue {
 public:
  SharedValue() = default;
  explicit SharedValue(std::uint32_t parties)
      : parts_(parties, FieldElement{}) {}

  static SharedValue constant(FieldElement v, std::uint32_t parties) {
    SharedValue out(parties);
    out.parts_[0] = v;
    return out;
  }

  std::uint32_t parties() const {
    return static_cast<std::uint32_t>(parts_.size());
  }

  FieldElement& operator[](PartyId p) { return parts_[p]; }
  FieldElement operator[](PartyId p) const { return parts_[p]; }

  std::vector<Share> to_shares() const {
    std::vector<Share> out;
    out.reserve(parts_.size());
    for (PartyId p = 0; p < parts_.size(); ++p) {
      out.push_back(Share{p, parts_[p]});
    }
    return out;
  }

  // Rebuilds a shared value from a labelled share set; every party in
  // [0, n) must appear exactly once.
  static SharedValue from_shares(std::span<const Share> shares);

  bool operator==(const SharedValue&) const = default;

 private:
  std::vector<FieldElement> parts_;
};

// Splits `secret` into n additive shares: the first n-1 are fresh
// uniform field elements, the last absorbs the difference.
SharedValue share(FieldElement secret, std::uint32_t parties, SeededRng& rng);

// Sum of all shares mod Q. The labelled overload checks completeness.
FieldElement reconstruct(const SharedValue& value);
FieldElement reconstruct(std::span<const Share> shares);

// Local (communication-free) arithmetic on shared values.
SharedValue add(const SharedValue& x, const SharedValue& y);
SharedValue sub(const SharedValue& x, const SharedValue& y);
SharedValue add_public(const SharedValue& x, FieldElement k);
SharedValue sub_public(const SharedValue& x, FieldElement k);
// k - x, shared.
SharedValue public_minus(FieldElement k, const SharedValue& x);
SharedValue scale(const SharedValue& x, FieldElement k);

}  // namespace prevent::mpc
