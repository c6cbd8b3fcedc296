#include "prevent/dealer.hpp"

#include "prevent/errors.hpp"

namespace prevent::mpc {

namespace {

void put_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64_le(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[at + i]) << (8 * i);
  return v;
}

void put_shared(std::vector<std::uint8_t>& out, const SharedValue& v) {
  for (PartyId p = 0; p < v.parties(); ++p) put_u64_le(out, v[p].value());
}

SharedValue get_shared(std::span<const std::uint8_t> b, std::size_t& at,
                       std::uint32_t parties) {
  SharedValue v(parties);
  for (PartyId p = 0; p < parties; ++p) {
    std::uint64_t raw = get_u64_le(b, at);
    at += 8;
    if (raw >= FieldElement::kModulus) {
      throw ProtocolError("dealer material holds an out-of-field word");
    }
    v[p] = FieldElement::reduce(raw);
  }
  return v;
}

}  // namespace

Dealer::Dealer(std::uint32_t parties, std::uint64_t seed)
    : parties_(parties), rng_(seed) {
  if (parties < 2) throw InvalidPartyCount("dealer needs at least 2 parties");
}

BeaverTriple Dealer::make_triple() {
  FieldElement a = rng_.field_element();
  FieldElement b = rng_.field_element();
  BeaverTriple t;
  t.a = share(a, parties_, rng_);
  t.b = share(b, parties_, rng_);
  t.c = share(a * b, parties_, rng_);
  return t;
}

std::vector<BeaverTriple> Dealer::make_triples(std::size_t count) {
  std::vector<BeaverTriple> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(make_triple());
  return out;
}

SharedValue Dealer::make_hidden_random() {
  return share(rng_.field_element(), parties_, rng_);
}

ComparisonMask Dealer::make_comparison_mask() {
  // All 61-bit patterns except all-ones land uniformly in [0, Q).
  std::uint64_t r;
  do {
    r = rng_.next_u64() >> 3;
  } while (r == FieldElement::kModulus);

  ComparisonMask m;
  m.mask = share(FieldElement::reduce(r), parties_, rng_);
  m.mask_bits.reserve(kFieldBits);
  for (unsigned i = 0; i < kFieldBits; ++i) {
    m.mask_bits.push_back(
        share(FieldElement::reduce((r >> i) & 1), parties_, rng_));
  }
  return m;
}

std::vector<ComparisonMask> Dealer::make_comparison_masks(std::size_t count) {
  std::vector<ComparisonMask> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(make_comparison_mask());
  return out;
}

std::vector<std::uint8_t> serialize_triples(std::span<const BeaverTriple> ts) {
  std::vector<std::uint8_t> out;
  std::uint64_t parties = ts.empty() ? 0 : ts.front().a.parties();
  out.reserve(8 + ts.size() * parties * 3 * 8);
  put_u64_le(out, ts.size() * parties * 3);
  for (const BeaverTriple& t : ts) {
    put_shared(out, t.a);
    put_shared(out, t.b);
    put_shared(out, t.c);
  }
  return out;
}

std::vector<BeaverTriple> deserialize_triples(std::span<const std::uint8_t> b,
                                              std::uint32_t parties) {
  if (b.size() < 8) throw ProtocolError("triple stream truncated");
  std::uint64_t words = get_u64_le(b, 0);
  if (b.size() != 8 + words * 8 || words % (3ULL * parties) != 0) {
    throw ProtocolError("triple stream length mismatch");
  }
  std::size_t at = 8;
  std::vector<BeaverTriple> out(words / (3ULL * parties));
  for (BeaverTriple& t : out) {
    t.a = get_shared(b, at, parties);
    t.b = get_shared(b, at, parties);
    t.c = get_shared(b, at, parties);
  }
  return out;
}

std::vector<std::uint8_t> serialize_masks(std::span<const ComparisonMask> ms) {
  std::vector<std::uint8_t> out;
  std::uint64_t parties = ms.empty() ? 0 : ms.front().mask.parties();
  std::uint64_t per_mask = parties * (1 + kFieldBits);
  out.reserve(8 + ms.size() * per_mask * 8);
  put_u64_le(out, ms.size() * per_mask);
  for (const ComparisonMask& m : ms) {
    put_shared(out, m.mask);
    for (const SharedValue& bit : m.mask_bits) put_shared(out, bit);
  }
  return out;
}

std::vector<ComparisonMask> deserialize_masks(std::span<const std::uint8_t> b,
                                              std::uint32_t parties) {
  if (b.size() < 8) throw ProtocolError("mask stream truncated");
  std::uint64_t words = get_u64_le(b, 0);
  std::uint64_t per_mask = parties * (1ULL + kFieldBits);
  if (b.size() != 8 + words * 8 || words % per_mask != 0) {
    throw ProtocolError("mask stream length mismatch");
  }
  std::size_t at = 8;
  std::vector<ComparisonMask> out(words / per_mask);
  for (ComparisonMask& m : out) {
    m.mask = get_shared(b, at, parties);
    m.mask_bits.reserve(kFieldBits);
    for (unsigned i = 0; i < kFieldBits; ++i) {
      m.mask_bits.push_back(get_shared(b, at, parties));
    }
  }
  return out;
}

}  // namespace prevent::mpc
