#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "prevent/orchestration.hpp"
#include "prevent/subscriber.hpp"

namespace prevent::deployment {

// Everything a later process needs to query the stores again.
struct Manifest {
  std::uint32_t servers = 3;
  std::uint64_t seed = 1;
  orchestration::QueryParams params;
  std::uint32_t stay_radius_cm = 500;
  std::uint32_t retention_days = 14;
  std::int32_t last_day = 0;
};

// Directory layout: manifest.json, grid.cfg, registry.csv and one
// server_<i>.bin snapshot per server.
void save(const std::string& dir, orchestration::PartySet& parties,
          const subscriber::SubscriberRegistry& registry,
          const Manifest& manifest);

struct Loaded {
  Manifest manifest;
  std::unique_ptr<orchestration::PartySet> parties;
  std::unique_ptr<subscriber::TokenAuthority> authority;
  std::unique_ptr<subscriber::SubscriberRegistry> registry;
};

// Restores stores and registry; validates shape congruence across the
// restored servers before handing the deployment back.
Loaded load(const std::string& dir);

}  // namespace prevent::deployment
