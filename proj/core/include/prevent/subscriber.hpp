#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "prevent/client_agent.hpp"
#include "prevent/orchestration.hpp"
#include "prevent/pseudo_id.hpp"

namespace prevent::subscriber {

// The fixed notification text. Nothing about places, times or other
// people ever reaches a notified user.
inline constexpr const char* kExposureMessage =
    "you may have been in contact with the virus";

struct Notification {
  std::string real_id;
  std::string message;
};

// Process-wide uniqueness of issued tokens, shared by all registries.
class TokenAuthority {
 public:
  PseudoId draw_unique(mpc::SeededRng& rng) {
    for (;;) {
      PseudoId id = PseudoId::draw(rng);
      if (issued_.insert(id).second) return id;
    }
  }
  bool record(PseudoId id) { return issued_.insert(id).second; }
  bool seen(PseudoId id) const { return issued_.contains(id); }
  std::size_t issued() const { return issued_.size(); }

 private:
  std::unordered_set<PseudoId, PseudoIdHash> issued_;
};

// One subscriber: holds the real-id <-> token mapping, issues pools,
// starts traces for diagnosed users, widens identified contacts to
// their full token sets for the next query generation, and matches
// broadcast results. No location-typed value enters or leaves this
// class; its vocabulary is tokens, labels and the fixed message.
class SubscriberRegistry : public orchestration::TokenDirectory {
 public:
  SubscriberRegistry(std::string subscriber_id, TokenAuthority* authority,
                     mpc::SeededRng rng)
      : id_(std::move(subscriber_id)), authority_(authority), rng_(rng) {}

  const std::string& subscriber_id() const { return id_; }

  // First registration plus the first pool. Repeats are refused.
  client::PseudoIdPool register_user(const std::string& real_id,
                                     std::size_t pool_size);

  // A further pool for a registered user (one per day in the
  // simulation).
  client::PseudoIdPool issue_pool(const std::string& real_id,
                                  std::size_t pool_size);

  bool is_registered(const std::string& real_id) const {
    return tokens_by_user_.contains(real_id);
  }
  // All tokens ever issued to the user, issuance order.
  const std::vector<PseudoId>& tokens_of(const std::string& real_id) const;
  const std::string* owner_of(PseudoId id) const;

  // TokenDirectory: the token set of the user this token was issued
  // to, empty for tokens issued elsewhere.
  std::vector<PseudoId> owner_tokens(PseudoId token) const override;
  std::size_t user_count() const { return user_order_.size(); }
  const std::vector<std::string>& users() const { return user_order_; }

  // Submits every token the user ever received as the query seed.
  orchestration::TraceResult initiate_trace(
      const std::string& real_id, orchestration::PartySet& parties,
      const orchestration::QueryParams& params, std::int32_t query_day,
      bool user_consented = true) const;

  // One notification per distinct registered user named in the
  // broadcast; foreign tokens are ignored silently.
  std::vector<Notification> match_notifications(
      std::span<const PseudoId> broadcast) const;

  // CSV: subscriber_id,real_id,token_hex
  void export_csv(std::ostream& out) const;
  static SubscriberRegistry import_csv(std::istream& in,
                                       TokenAuthority* authority,
                                       mpc::SeededRng rng);

 private:
  std::string id_;
  TokenAuthority* authority_;
  mpc::SeededRng rng_;
  std::vector<std::string> user_order_;
  std::unordered_map<std::string, std::vector<PseudoId>> tokens_by_user_;
  std::unordered_map<PseudoId, std::string, PseudoIdHash> owner_;
};

}  // namespace prevent::subscriber
