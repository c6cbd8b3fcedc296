#include "prevent/shares.hpp"

namespace prevent::mpc {

SharedValue SharedValue::from_shares(std::span<const Share> shares) {
  SharedValue out(static_cast<std::uint32_t>(shares.size()));
  std::vector<bool> seen(shares.size(), false);
  for (const Share& s : shares) {
    if (s.owner >= shares.size() || seen[s.owner]) {
      throw IncompleteShareSet("share set is not one-per-party");
    }
    seen[s.owner] = true;
    out.parts_[s.owner] = s.value;
  }
  return out;
}

SharedValue share(FieldElement secret, std::uint32_t parties, SeededRng& rng) {
  if (parties < 2) {
    throw InvalidPartyCount("secret sharing needs at least 2 parties");
  }
  SharedValue out(parties);
  FieldElement sum;
  for (PartyId p = 0; p + 1 < parties; ++p) {
    out[p] = rng.field_element();
    sum += out[p];
  }
  out[parties - 1] = secret - sum;
  return out;
}

FieldElement reconstruct(const SharedValue& value) {
  if (value.parties() < 2) {
    throw IncompleteShareSet("shared value holds fewer than 2 parts");
  }
  FieldElement sum;
  for (PartyId p = 0; p < value.parties(); ++p) sum += value[p];
  return sum;
}

FieldElement reconstruct(std::span<const Share> shares) {
  return reconstruct(SharedValue::from_shares(shares));
}

SharedValue add(const SharedValue& x, const SharedValue& y) {
  SharedValue out(x.parties());
  for (PartyId p = 0; p < x.parties(); ++p) out[p] = x[p] + y[p];
  return out;
}

SharedValue sub(const SharedValue& x, const SharedValue& y) {
  SharedValue out(x.parties());
  for (PartyId p = 0; p < x.parties(); ++p) out[p] = x[p] - y[p];
  return out;
}

SharedValue add_public(const SharedValue& x, FieldElement k) {
  SharedValue out = x;
  out[0] += k;
  return out;
}

SharedValue sub_public(const SharedValue& x, FieldElement k) {
  SharedValue out = x;
  out[0] -= k;
  return out;
}

SharedValue public_minus(FieldElement k, const SharedValue& x) {
  SharedValue out(x.parties());
  for (PartyId p = 0; p < x.parties(); ++p) out[p] = x[p].negated();
  out[0] += k;
  return out;
}

SharedValue scale(const SharedValue& x, FieldElement k) {
  SharedValue out(x.parties());
  for (PartyId p = 0; p < x.parties(); ++p) out[p] = x[p] * k;
  return out;
}

}  // namespace prevent::mpc
