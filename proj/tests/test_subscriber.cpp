#include <set>
#include <sstream>

#include "doctest.h"
#include "prevent/errors.hpp"
#include "prevent/subscriber.hpp"

using namespace prevent;
using mpc::SeededRng;
using subscriber::SubscriberRegistry;
using subscriber::TokenAuthority;

TEST_CASE("registration issues fresh unique tokens") {
  TokenAuthority authority;
  SubscriberRegistry registry("clinic", &authority, SeededRng(1));

  const client::PseudoIdPool pool = registry.register_user("alice", 20);
  CHECK(pool.issued_by() == "clinic");
  CHECK(pool.remaining() == 20);
  std::set<PseudoId> distinct(pool.ids().begin(), pool.ids().end());
  CHECK(distinct.size() == 20);

  const client::PseudoIdPool other = registry.register_user("bob", 20);
  for (const PseudoId& id : other.ids()) {
    CHECK_FALSE(distinct.contains(id));
  }

  // token -> real id -> token round trip
  for (const PseudoId& id : pool.ids()) {
    REQUIRE(registry.owner_of(id) != nullptr);
    CHECK(*registry.owner_of(id) == "alice");
  }
  const auto& alice_tokens = registry.tokens_of("alice");
  CHECK(alice_tokens.size() == 20);

  CHECK_THROWS_AS(registry.register_user("alice", 20), AlreadyRegistered);
}

TEST_CASE("per-day pools accumulate under one identity") {
  TokenAuthority authority;
  SubscriberRegistry registry("works", &authority, SeededRng(2));
  registry.register_user("carol", 4);
  registry.issue_pool("carol", 4);
  registry.issue_pool("carol", 4);
  CHECK(registry.tokens_of("carol").size() == 12);
  CHECK(authority.issued() == 12);
  CHECK_THROWS_AS(registry.issue_pool("dan", 4), NotRegistered);
}

TEST_CASE("global uniqueness holds across subscribers") {
  TokenAuthority authority;
  SubscriberRegistry a("a", &authority, SeededRng(3));
  SubscriberRegistry b("b", &authority, SeededRng(3));  // same rng seed!
  const client::PseudoIdPool pa = a.register_user("u", 50);
  const client::PseudoIdPool pb = b.register_user("u", 50);
  std::set<PseudoId> all(pa.ids().begin(), pa.ids().end());
  for (const PseudoId& id : pb.ids()) {
    CHECK(all.insert(id).second);
  }
}

TEST_CASE("notifications deduplicate by real identity") {
  TokenAuthority authority;
  SubscriberRegistry registry("clinic", &authority, SeededRng(4));
  const client::PseudoIdPool alice = registry.register_user("alice", 4);
  registry.register_user("bob", 4);

  CHECK(registry.match_notifications({}).empty());

  std::vector<PseudoId> broadcast{alice.ids()[0], alice.ids()[2],
                                  PseudoId{9, 9}};
  const auto notes = registry.match_notifications(broadcast);
  REQUIRE(notes.size() == 1);
  CHECK(notes[0].real_id == "alice");
  CHECK(notes[0].message == subscriber::kExposureMessage);
}

TEST_CASE("the notification vocabulary carries no location data") {
  // The exposure message is a fixed string; a notification is exactly
  // (label, message) and the registry API speaks tokens and labels
  // only. This is the checkable slice of the privacy argument.
  TokenAuthority authority;
  SubscriberRegistry registry("clinic", &authority, SeededRng(5));
  const client::PseudoIdPool pool = registry.register_user("eve", 2);
  for (const auto& note : registry.match_notifications(pool.ids())) {
    CHECK(note.message == std::string(subscriber::kExposureMessage));
    CHECK(note.message.find("cell") == std::string::npos);
    CHECK(note.real_id == "eve");
  }
  static_assert(
      std::is_same_v<decltype(subscriber::Notification::real_id), std::string>);
  static_assert(
      std::is_same_v<decltype(subscriber::Notification::message), std::string>);
}

TEST_CASE("registration table round-trips through CSV") {
  TokenAuthority authority;
  SubscriberRegistry registry("clinic", &authority, SeededRng(6));
  registry.register_user("alice", 3);
  registry.register_user("bob", 2);
  registry.issue_pool("alice", 1);

  std::stringstream csv;
  registry.export_csv(csv);

  TokenAuthority fresh;
  SubscriberRegistry back =
      SubscriberRegistry::import_csv(csv, &fresh, SeededRng(7));
  CHECK(back.subscriber_id() == "clinic");
  CHECK(back.user_count() == 2);
  CHECK(back.tokens_of("alice") == registry.tokens_of("alice"));
  CHECK(back.tokens_of("bob") == registry.tokens_of("bob"));
  CHECK(fresh.issued() == 6);

  std::stringstream repeated(
      "subscriber_id,real_id,token_hex\n"
      "c,u,000102030405060708090a0b0c0d0e0f\n"
      "c,v,000102030405060708090a0b0c0d0e0f\n");
  TokenAuthority strict;
  CHECK_THROWS_AS(SubscriberRegistry::import_csv(repeated, &strict, SeededRng(8)),
                  InvalidInput);
}

TEST_CASE("trace initiation refuses unknown or non-consenting users") {
  TokenAuthority authority;
  SubscriberRegistry registry("clinic", &authority, SeededRng(9));
  registry.register_user("alice", 2);

  grid::GridConfig g;
  g.side_cm = 10000;
  g.cell_widths_cm = {1000, 5000};
  orchestration::PartySet parties(2, g, 3);
  orchestration::QueryParams params;
  params.infectious_distance_cm = 400;
  params.incubation_days = 3;

  CHECK_THROWS_AS(registry.initiate_trace("mallory", parties, params, 2),
                  NotRegistered);
  CHECK_THROWS_AS(registry.initiate_trace("alice", parties, params, 2, false),
                  InvalidInput);

  // Registered but never reported: empty result.
  const auto result = registry.initiate_trace("alice", parties, params, 2);
  CHECK(result.hits.empty());
}
