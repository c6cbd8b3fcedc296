#include "prevent/mpc.hpp"

#include "prevent/errors.hpp"

namespace prevent::mpc {

namespace {

// 2^59 = (Q+1)/4. Field residues below kQuarter are "small" for the
// bounded-magnitude comparison contract.
constexpr std::uint64_t kQuarter = 1ULL << 59;

// Shared-bits vs public-threshold test: returns shares of the bit
// [bits > threshold]. Scans from the most significant bit, keeping a
// running product of "equal so far"; the candidate terms are disjoint
// so their sum is already the result bit.
SharedValue bit_greater_than(MpcContext& ctx,
                             const std::vector<SharedValue>& bits,
                             std::uint64_t threshold) {
  const std::uint32_t n = ctx.parties();
  SharedValue acc(n);
  SharedValue equal_prefix;
  bool prefix_is_one = true;
  for (int i = static_cast<int>(kFieldBits) - 1; i >= 0; --i) {
    const bool t_bit = ((threshold >> i) & 1) != 0;
    if (!t_bit) {
      acc = add(acc, prefix_is_one ? bits[i]
                                   : secure_mul(ctx, bits[i], equal_prefix));
    }
    if (i == 0) break;
    SharedValue eq_bit = t_bit ? bits[i]
                               : public_minus(FieldElement::reduce(1), bits[i]);
    if (prefix_is_one) {
      equal_prefix = std::move(eq_bit);
      prefix_is_one = false;
    } else {
      equal_prefix = secure_mul(ctx, equal_prefix, eq_bit);
    }
  }
  return acc;
}

}  // namespace

FieldElement MpcContext::open(const SharedValue& v) {
  if (v.parties() != parties_) {
    throw ProtocolError("opened value has wrong party count");
  }
  counters_.opened_values++;
  FieldElement sum;
  const std::uint32_t round = next_round();
  for (PartyId sender = 0; sender < parties_; ++sender) {
    sum += v[sender];
    if (trace_ != nullptr) {
      for (PartyId receiver = 0; receiver < parties_; ++receiver) {
        if (receiver != sender) trace_->record(round, sender, receiver, v[sender]);
      }
    }
  }
  return sum;
}

void MpcContext::log_dealer_delivery(const SharedValue& v) {
  if (trace_ == nullptr) return;
  const std::uint32_t round = next_round();
  for (PartyId p = 0; p < parties_; ++p) {
    trace_->record(round, kDealerParty, p, v[p]);
  }
}

BeaverTriple MpcContext::fresh_triple() {
  BeaverTriple t = dealer_.make_triple();
  log_dealer_delivery(t.a);
  log_dealer_delivery(t.b);
  log_dealer_delivery(t.c);
  return t;
}

SharedValue MpcContext::fresh_hidden_random() {
  SharedValue r = dealer_.make_hidden_random();
  log_dealer_delivery(r);
  return r;
}

ComparisonMask MpcContext::fresh_comparison_mask() {
  ComparisonMask m = dealer_.make_comparison_mask();
  log_dealer_delivery(m.mask);
  for (const SharedValue& bit : m.mask_bits) log_dealer_delivery(bit);
  return m;
}

SharedValue secure_mul(MpcContext& ctx, const SharedValue& x,
                       const SharedValue& y, BeaverTriple& triple) {
  if (triple.used) throw TripleExhausted("Beaver triple already consumed");
  if (x.parties() != ctx.parties() || y.parties() != ctx.parties() ||
      triple.a.parties() != ctx.parties()) {
    throw ProtocolError("secure_mul party count mismatch");
  }
  triple.used = true;
  ctx.counters().multiplications++;
  ctx.counters().triples_consumed++;

  const FieldElement d = ctx.open(sub(x, triple.a));
  const FieldElement e = ctx.open(sub(y, triple.b));

  const std::uint32_t n = ctx.parties();
  SharedValue z(n);
  for (PartyId p = 0; p < n; ++p) {
    z[p] = triple.c[p] + d * triple.b[p] + e * triple.a[p];
  }
  z[0] += d * e;
  return z;
}

SharedValue secure_mul(MpcContext& ctx, const SharedValue& x,
                       const SharedValue& y) {
  BeaverTriple triple = ctx.fresh_triple();
  return secure_mul(ctx, x, y, triple);
}

SharedValue secure_rand(MpcContext& ctx) {
  ctx.counters().random_draws++;
  return ctx.fresh_hidden_random();
}

EqZeroOutcome eq_zero_open(MpcContext& ctx, const SharedValue& difference) {
  ctx.counters().equality_tests++;
  EqZeroOutcome out;
  out.trace_first = ctx.trace() != nullptr ? ctx.trace()->size() : 0;

  SharedValue r = secure_rand(ctx);
  SharedValue v = secure_mul(ctx, difference, r);
  out.is_zero = ctx.open(v).is_zero();

  out.trace_count =
      ctx.trace() != nullptr ? ctx.trace()->size() - out.trace_first : 0;
  return out;
}

bool secure_less_than(MpcContext& ctx, const SharedValue& value,
                      FieldElement bound) {
  if (bound.value() > kQuarter) {
    throw InvalidInput("comparison bound exceeds 2^59");
  }
  ctx.counters().comparisons++;
  ctx.counters().masks_consumed++;

  // Shift into [0, 2^60): hidden(value) - bound + 2^59 is "small"
  // exactly when hidden(value) < bound.
  SharedValue shifted =
      add_public(value, FieldElement::reduce(kQuarter) - bound);

  ComparisonMask mask = ctx.fresh_comparison_mask();
  const std::uint64_t u = ctx.open(add(shifted, mask.mask)).value();

  // shifted = u - mask (mod Q) lies below 2^59 iff mask sits in the
  // arc (u - 2^59, u]; split on whether the arc wraps past zero.
  SharedValue above_u = bit_greater_than(ctx, mask.mask_bits, u);
  SharedValue result;
  if (u >= kQuarter) {
    SharedValue above_low =
        bit_greater_than(ctx, mask.mask_bits, u - kQuarter);
    result = secure_mul(
        ctx, public_minus(FieldElement::reduce(1), above_u), above_low);
  } else {
    SharedValue above_high = bit_greater_than(
        ctx, mask.mask_bits, u + FieldElement::kModulus - kQuarter);
    result = add(public_minus(FieldElement::reduce(1), above_u),
                 secure_mul(ctx, above_u, above_high));
  }

  const FieldElement opened = ctx.open(result);
  if (opened.value() > 1) {
    throw ProtocolError("comparison result is not a bit");
  }
  return opened.value() == 1;
}

}  // namespace prevent::mpc
