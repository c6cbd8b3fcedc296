#pragma once

#include <cstdint>
#include <vector>

#include "prevent/dealer.hpp"
#include "prevent/shares.hpp"

namespace prevent::mpc {

// Sender id used for dealer deliveries in traces.
inline constexpr PartyId kDealerParty = 0xffffffffu;

// One transmitted or opened value. Traces never hold plaintext
// secrets: everything recorded is a share, a masked opening, or a
// protocol output.
struct TraceEvent {
  std::uint32_t round;
  PartyId sender;
  PartyId receiver;
  FieldElement value;
};

class TraceLog {
 public:
  void record(std::uint32_t round, PartyId sender, PartyId receiver,
              FieldElement value) {
    events_.push_back(TraceEvent{round, sender, receiver, value});
  }

  const std::vector<TraceEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  void clear() { events_.clear(); }

  std::vector<FieldElement> received_by(PartyId p) const {
    std::vector<FieldElement> out;
    for (const TraceEvent& e : events_) {
      if (e.receiver == p) out.push_back(e.value);
    }
    return out;
  }

 private:
  std::vector<TraceEvent> events_;
};

struct ProtocolCounters {
  std::uint64_t multiplications = 0;
  std::uint64_t random_draws = 0;
  std::uint64_t equality_tests = 0;
  std::uint64_t comparisons = 0;
  std::uint64_t opened_values = 0;
  std::uint64_t triples_consumed = 0;
  std::uint64_t masks_consumed = 0;
};

// Shared state for one synchronous protocol run: party count, dealer,
// round clock, counters and the optional trace sink. The orchestrator
// owns one context per deployment and drives every round through it.
class MpcContext {
 public:
  MpcContext(std::uint32_t parties, std::uint64_t dealer_seed)
      : parties_(parties), dealer_(parties, dealer_seed) {}

  std::uint32_t parties() const { return parties_; }
  Dealer& dealer() { return dealer_; }
  ProtocolCounters& counters() { return counters_; }
  const ProtocolCounters& counters() const { return counters_; }

  void set_trace(TraceLog* log) { trace_ = log; }
  TraceLog* trace() { return trace_; }

  std::uint32_t next_round() { return round_++; }

  // Every party broadcasts its part; returns the reconstructed value.
  FieldElement open(const SharedValue& v);

  // Dealer issuance, logged as dealer->party deliveries when tracing.
  BeaverTriple fresh_triple();
  SharedValue fresh_hidden_random();
  ComparisonMask fresh_comparison_mask();

 private:
  void log_dealer_delivery(const SharedValue& v);

  std::uint32_t parties_;
  Dealer dealer_;
  ProtocolCounters counters_;
  TraceLog* trace_ = nullptr;
  std::uint32_t round_ = 0;
};

// x*y under a Beaver triple; the transcript shows only the two
// uniformly masked openings x-a and y-b.
SharedValue secure_mul(MpcContext& ctx, const SharedValue& x,
                       const SharedValue& y, BeaverTriple& triple);
SharedValue secure_mul(MpcContext& ctx, const SharedValue& x,
                       const SharedValue& y);

// Shares of a uniform value unknown to every party.
SharedValue secure_rand(MpcContext& ctx);

struct EqZeroOutcome {
  bool is_zero;
  // Slice of the context trace covering this invocation (empty when
  // tracing is off).
  std::size_t trace_first = 0;
  std::size_t trace_count = 0;
};

// Opens d*r for a fresh hidden r: zero iff d is zero, except for the
// 1/Q chance that r itself was zero. A nonzero opening is uniform.
EqZeroOutcome eq_zero_open(MpcContext& ctx, const SharedValue& difference);

// Bounded-magnitude comparison: true iff hidden(value) < bound.
// Caller contract: hidden(value) in [0, B] with B < Q/4, and
// bound <= 2^59. A hidden-value violation is undetectable here.
bool secure_less_than(MpcContext& ctx, const SharedValue& value,
                      FieldElement bound);

}  // namespace prevent::mpc
