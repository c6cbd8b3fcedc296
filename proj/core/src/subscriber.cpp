#include "prevent/subscriber.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "prevent/errors.hpp"

namespace prevent::subscriber {

client::PseudoIdPool SubscriberRegistry::register_user(
    const std::string& real_id, std::size_t pool_size) {
  if (tokens_by_user_.contains(real_id)) {
    throw AlreadyRegistered("user already registered with this subscriber: " +
                            real_id);
  }
  user_order_.push_back(real_id);
  tokens_by_user_.emplace(real_id, std::vector<PseudoId>{});
  return issue_pool(real_id, pool_size);
}

client::PseudoIdPool SubscriberRegistry::issue_pool(const std::string& real_id,
                                                    std::size_t pool_size) {
  auto it = tokens_by_user_.find(real_id);
  if (it == tokens_by_user_.end()) {
    throw NotRegistered("unknown user: " + real_id);
  }
  std::vector<PseudoId> ids;
  ids.reserve(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) {
    PseudoId id = authority_->draw_unique(rng_);
    ids.push_back(id);
    it->second.push_back(id);
    owner_.emplace(id, real_id);
  }
  return client::PseudoIdPool(id_, std::move(ids));
}

const std::vector<PseudoId>& SubscriberRegistry::tokens_of(
    const std::string& real_id) const {
  auto it = tokens_by_user_.find(real_id);
  if (it == tokens_by_user_.end()) {
    throw NotRegistered("unknown user: " + real_id);
  }
  return it->second;
}

const std::string* SubscriberRegistry::owner_of(PseudoId id) const {
  auto it = owner_.find(id);
  return it == owner_.end() ? nullptr : &it->second;
}

orchestration::TraceResult SubscriberRegistry::initiate_trace(
    const std::string& real_id, orchestration::PartySet& parties,
    const orchestration::QueryParams& params, std::int32_t query_day,
    bool user_consented) const {
  if (!user_consented) {
    throw InvalidInput("trace needs the user's consent");
  }
  const std::vector<PseudoId>& seeds = tokens_of(real_id);
  return orchestration::multi_generation_query(parties, seeds, params,
                                               query_day);
}

std::vector<Notification> SubscriberRegistry::match_notifications(
    std::span<const PseudoId> broadcast) const {
  std::vector<Notification> out;
  std::unordered_set<std::string> notified;
  for (const PseudoId& id : broadcast) {
    auto it = owner_.find(id);
    if (it == owner_.end()) continue;
    if (notified.insert(it->second).second) {
      out.push_back(Notification{it->second, kExposureMessage});
    }
  }
  return out;
}

void SubscriberRegistry::export_csv(std::ostream& out) const {
  out << "subscriber_id,real_id,token_hex\n";
  for (const std::string& user : user_order_) {
    for (const PseudoId& id : tokens_by_user_.at(user)) {
      out << id_ << ',' << user << ',' << id.to_hex() << '\n';
    }
  }
}

SubscriberRegistry SubscriberRegistry::import_csv(std::istream& in,
                                                  TokenAuthority* authority,
                                                  mpc::SeededRng rng) {
  std::string line;
  std::string subscriber_id;
  SubscriberRegistry registry("", authority, rng);
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("subscriber_id", 0) == 0) continue;
    }
    std::stringstream ss(line);
    std::string sub, user, token;
    if (!std::getline(ss, sub, ',') || !std::getline(ss, user, ',') ||
        !std::getline(ss, token, ',')) {
      throw InvalidInput("malformed registration CSV line: " + line);
    }
    if (subscriber_id.empty()) {
      subscriber_id = sub;
      registry.id_ = sub;
    } else if (sub != subscriber_id) {
      throw InvalidInput("registration CSV mixes subscribers");
    }
    const PseudoId id = PseudoId::from_hex(token);
    if (!authority->record(id)) {
      throw InvalidInput("registration CSV repeats a token");
    }
    if (!registry.tokens_by_user_.contains(user)) {
      registry.user_order_.push_back(user);
      registry.tokens_by_user_.emplace(user, std::vector<PseudoId>{});
    }
    registry.tokens_by_user_[user].push_back(id);
    registry.owner_.emplace(id, user);
  }
  return registry;
}

}  // namespace prevent::subscriber
