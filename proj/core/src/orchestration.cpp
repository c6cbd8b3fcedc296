#include "prevent/orchestration.hpp"

#include <algorithm>

#include "prevent/errors.hpp"
#include "prevent/subscriber.hpp"

namespace prevent::orchestration {

void QueryParams::validate(const grid::GridConfig& grid) const {
  if (infectious_distance_cm <= 0) {
    throw InvalidInput("infectious distance must be positive");
  }
  if (infectious_window_s == 0) {
    throw InvalidInput("infectious window must be positive");
  }
  if (incubation_days == 0) {
    throw InvalidInput("incubation period must be at least 1 day");
  }
  if (grid.width_at(1) < 2 * infectious_distance_cm) {
    throw InvalidInput("lowest cell width must be at least 2D");
  }
}

Transport::Transport(std::uint32_t servers, std::uint64_t permute_seed)
    : inboxes_(servers), rng_(permute_seed) {
  if (servers < 2) throw InvalidPartyCount("transport needs at least 2 servers");
}

std::vector<Transport::Receipt> Transport::submit(
    client::DayReportBatches batches) {
  if (failures_ > 0) {
    --failures_;
    throw RetryExhausted("transport gave up after retries");
  }
  if (batches.per_server.size() != inboxes_.size()) {
    throw ProtocolError("batch count does not match server count");
  }

  // A second seeded permutation on arrival, identical across servers
  // so message sets stay aligned.
  const std::size_t count = batches.message_sets;
  for (std::size_t k = count; k > 1; --k) {
    const std::size_t swap_with = static_cast<std::size_t>(rng_.below(k));
    if (swap_with == k - 1) continue;
    for (auto& batch : batches.per_server) {
      std::swap(batch[k - 1], batch[swap_with]);
    }
  }

  std::vector<Receipt> receipts;
  for (std::uint32_t s = 0; s < inboxes_.size(); ++s) {
    for (client::LocationReport& report : batches.per_server[s]) {
      receipts.push_back(Receipt{s, report.pseudo_id});
      inboxes_[s].push_back(std::move(report));
    }
  }
  return receipts;
}

std::vector<std::vector<client::LocationReport>> Transport::drain() {
  std::vector<std::vector<client::LocationReport>> out(inboxes_.size());
  out.swap(inboxes_);
  return out;
}

std::vector<Transport::Receipt> flush(client::DayReportBatches batches,
                                      Transport& transport) {
  return transport.submit(std::move(batches));
}

PartySet::PartySet(std::uint32_t servers, grid::GridConfig grid,
                   std::uint64_t seed)
    : grid_(std::move(grid)),
      ctx_(servers, mpc::SeededRng(seed).fork(0xdea1e6ULL).seed()),
      transport_(servers, mpc::SeededRng(seed).fork(0x7a45b08fULL).seed()) {
  grid_.validate();
  servers_.reserve(servers);
  for (std::uint32_t i = 0; i < servers; ++i) {
    servers_.emplace_back(i, grid_.levels());
  }
}

PartySet::PartySet(std::vector<server::TracingServer> servers,
                   grid::GridConfig grid, std::uint64_t seed)
    : grid_(std::move(grid)),
      servers_(std::move(servers)),
      ctx_(static_cast<std::uint32_t>(servers_.size()),
           mpc::SeededRng(seed).fork(0xdea1e6ULL).seed()),
      transport_(static_cast<std::uint32_t>(servers_.size()),
                 mpc::SeededRng(seed).fork(0x7a45b08fULL).seed()) {
  grid_.validate();
  for (std::uint32_t i = 0; i < servers_.size(); ++i) {
    if (servers_[i].party() != i || servers_[i].levels() != grid_.levels()) {
      throw ProtocolError("restored servers do not match the deployment");
    }
  }
}

server::RecordRef run_insert(PartySet& parties,
                             std::span<const client::LocationReport> reports,
                             std::int32_t day) {
  return server::insert_report(parties.servers(), reports, day, parties.ctx());
}

std::size_t ingest_day(PartySet& parties, std::int32_t day) {
  auto inboxes = parties.transport().drain();
  const std::uint32_t n = parties.server_count();
  const std::size_t sets = inboxes[0].size();
  for (std::uint32_t i = 1; i < n; ++i) {
    if (inboxes[i].size() != sets) {
      throw ProtocolError("server inboxes are not aligned");
    }
  }

  std::size_t stored = 0;
  std::vector<client::LocationReport> message_set(n);
  for (std::size_t k = 0; k < sets; ++k) {
    for (std::uint32_t i = 0; i < n; ++i) {
      message_set[i] = std::move(inboxes[i][k]);
    }
    try {
      run_insert(parties, message_set, day);
      ++stored;
    } catch (const PseudoIdReuse&) {
      // Whole set dropped; no server mutated anything.
    }
  }
  return stored;
}

namespace {

struct FrontierToken {
  PseudoId id;
  std::int32_t anchor_day;
};

// One generation over all frontier tokens. Window anchoring is per
// token so the contact-anchored variant reuses the same path.
std::vector<FrontierToken> query_generation(
    PartySet& parties, std::span<const FrontierToken> frontier,
    const QueryParams& params,
    const std::unordered_set<PseudoId, PseudoIdHash>& excluded) {
  const std::uint32_t n = parties.server_count();
  const server::ComparePolicy policy{params.infectious_distance_cm,
                                     params.infectious_window_s,
                                     params.symmetric_window};

  std::vector<FrontierToken> found;
  std::unordered_set<PseudoId, PseudoIdHash> found_set;

  std::vector<std::vector<server::TracingServer::PatientRecord>> records(n);
  std::vector<const server::LeafGroup*> leaves(n);
  for (const FrontierToken& token : frontier) {
    const std::int32_t first_day =
        token.anchor_day - static_cast<std::int32_t>(params.incubation_days) + 1;
    records[0] =
        parties.server(0).lookup_patient(token.id, first_day, token.anchor_day);
    for (std::uint32_t i = 1; i < n; ++i) {
      records[i] = parties.server(i).lookup_patient(token.id, first_day,
                                                    token.anchor_day);
      if (records[i].size() != records[0].size()) {
        throw ProtocolError("patient lookups disagree across servers");
      }
    }

    for (std::size_t r = 0; r < records[0].size(); ++r) {
      const std::uint32_t patient_pos = records[0][r].ref.position;
      for (std::uint32_t i = 0; i < n; ++i) {
        if (records[i][r].ref.position != patient_pos ||
            records[i][r].day != records[0][r].day) {
          throw ProtocolError("patient records disagree across servers");
        }
        leaves[i] = records[i][r].ref.leaf;
      }
      const std::size_t group_size = leaves[0]->records.size();
      for (std::uint32_t pos = 0; pos < group_size; ++pos) {
        if (pos == patient_pos) continue;
        parties.record_comparisons()++;
        if (!server::compare_records(leaves, patient_pos, pos, policy,
                                     parties.ctx())) {
          continue;
        }
        const PseudoId candidate = leaves[0]->records[pos].pseudo_id;
        if (excluded.contains(candidate) || found_set.contains(candidate)) {
          continue;
        }
        found_set.insert(candidate);
        found.push_back(FrontierToken{candidate, records[0][r].day});
      }
    }
  }
  return found;
}

}  // namespace

std::vector<PseudoId> contact_query(PartySet& parties,
                                    std::span<const PseudoId> seeds,
                                    const QueryParams& params,
                                    std::int32_t query_day) {
  params.validate(parties.grid());
  std::unordered_set<PseudoId, PseudoIdHash> excluded;
  std::vector<FrontierToken> frontier;
  for (const PseudoId& id : seeds) {
    if (excluded.insert(id).second) {
      frontier.push_back(FrontierToken{id, query_day});
    }
  }
  std::vector<PseudoId> out;
  for (const FrontierToken& token :
       query_generation(parties, frontier, params, excluded)) {
    out.push_back(token.id);
  }
  return out;
}

TraceResult multi_generation_query(PartySet& parties,
                                   std::span<const PseudoId> seeds,
                                   const QueryParams& params,
                                   std::int32_t query_day,
                                   const TokenDirectory* directory) {
  params.validate(parties.grid());
  TraceResult result;
  std::unordered_set<PseudoId, PseudoIdHash> seen;
  std::vector<FrontierToken> frontier;
  for (const PseudoId& id : seeds) {
    if (seen.insert(id).second) {
      frontier.push_back(FrontierToken{id, query_day});
    }
  }

  std::uint32_t generation = 1;
  while (!frontier.empty()) {
    if (params.max_generations && generation > *params.max_generations) break;
    const std::vector<FrontierToken> found =
        query_generation(parties, frontier, params, seen);

    for (const FrontierToken& token : found) {
      seen.insert(token.id);
      result.hits.push_back(TraceResult::Hit{token.id, generation});
    }

    // Everything just identified becomes the next generation's query
    // input, widened through the subscribers to the owners' full
    // token sets. Those sets count as query inputs now, never as
    // results later.
    frontier.clear();
    std::unordered_set<PseudoId, PseudoIdHash> queued;
    for (const FrontierToken& token : found) {
      const std::int32_t anchor =
          params.window_from_contact ? token.anchor_day : query_day;
      if (queued.insert(token.id).second) {
        frontier.push_back(FrontierToken{token.id, anchor});
      }
      if (directory == nullptr) continue;
      for (const PseudoId& sibling : directory->owner_tokens(token.id)) {
        seen.insert(sibling);
        if (queued.insert(sibling).second) {
          frontier.push_back(FrontierToken{sibling, anchor});
        }
      }
    }
    ++generation;
  }
  return result;
}

std::size_t broadcast_results(
    const TraceResult& result,
    std::span<subscriber::SubscriberRegistry* const> subscribers) {
  std::vector<PseudoId> ids;
  ids.reserve(result.hits.size());
  for (const TraceResult::Hit& hit : result.hits) ids.push_back(hit.pseudo_id);

  std::size_t matched = 0;
  for (subscriber::SubscriberRegistry* sub : subscribers) {
    matched += sub->match_notifications(ids).size();
  }
  return matched;
}

}  // namespace prevent::orchestration
