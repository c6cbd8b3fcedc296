#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_set>
#include <vector>

#include "prevent/client_agent.hpp"
#include "prevent/grid.hpp"
#include "prevent/mpc.hpp"
#include "prevent/tracing_server.hpp"

namespace prevent::subscriber {
class SubscriberRegistry;
}

namespace prevent::orchestration {

struct QueryParams {
  std::int64_t infectious_distance_cm = 200;  // D
  std::uint32_t infectious_window_s = 3600;   // tau
  std::uint32_t incubation_days = 7;          // T
  std::optional<std::uint32_t> max_generations;
  // Definition 1 writes a one-sided time condition; the symmetric
  // window is the default reading, the one-sided one is selectable.
  bool symmetric_window = true;
  // Later generations reuse the first patient's day window unless the
  // contact's own record day should anchor them.
  bool window_from_contact = false;

  void validate(const grid::GridConfig& grid) const;
};

// Deterministic in-memory message bus. Batches stay aligned across
// servers (message k everywhere belongs to one message set); a seeded
// permutation on submission models the unlinkable, order-free arrival
// the real system gets from rotating addresses.
class Transport {
 public:
  Transport(std::uint32_t servers, std::uint64_t permute_seed);

  struct Receipt {
    std::uint32_t server = 0;
    PseudoId pseudo_id;
  };

  // One client's end-of-day traffic; returns one receipt per message.
  std::vector<Receipt> submit(client::DayReportBatches batches);

  // Hands the accumulated aligned batches to the orchestrator.
  std::vector<std::vector<client::LocationReport>> drain();

  std::size_t pending_sets() const { return inboxes_.empty() ? 0 : inboxes_[0].size(); }

  // Test hook: the next `count` submissions fail after retries.
  void inject_failures(std::uint32_t count) { failures_ = count; }

 private:
  std::vector<std::vector<client::LocationReport>> inboxes_;
  mpc::SeededRng rng_;
  std::uint32_t failures_ = 0;
};

// Client-side end-of-day handoff.
std::vector<Transport::Receipt> flush(client::DayReportBatches batches,
                                      Transport& transport);

// The full deployment one orchestrator drives: N servers, the dealer
// behind one MPC context, and the bus. The orchestrator is the single
// clock; every protocol round below runs through it.
class PartySet {
 public:
  PartySet(std::uint32_t servers, grid::GridConfig grid, std::uint64_t seed);

  // Rebuilds a deployment around restored stores. Protocol randomness
  // starts fresh; results do not depend on it.
  PartySet(std::vector<server::TracingServer> servers, grid::GridConfig grid,
           std::uint64_t seed);

  std::uint32_t server_count() const {
    return static_cast<std::uint32_t>(servers_.size());
  }
  std::span<server::TracingServer> servers() {
    return {servers_.data(), servers_.size()};
  }
  server::TracingServer& server(std::uint32_t i) { return servers_[i]; }
  mpc::MpcContext& ctx() { return ctx_; }
  Transport& transport() { return transport_; }
  const grid::GridConfig& grid() const { return grid_; }

  std::uint64_t record_comparisons() const { return record_comparisons_; }
  std::uint64_t& record_comparisons() { return record_comparisons_; }

 private:
  grid::GridConfig grid_;
  std::vector<server::TracingServer> servers_;
  mpc::MpcContext ctx_;
  Transport transport_;
  std::uint64_t record_comparisons_ = 0;
};

// One message set through the leveled insertion rounds, all servers
// in lockstep; a pseudo-id reuse rejects the whole insert atomically.
server::RecordRef run_insert(
    PartySet& parties, std::span<const client::LocationReport> reports,
    std::int32_t day);

// Drains the bus and inserts everything that arrived for `day`.
// Returns the number of message sets stored (reuses are dropped whole).
std::size_t ingest_day(PartySet& parties, std::int32_t day);

// One generation: every record of every seed token against its leaf
// groups on all servers. Seed tokens never appear in the result.
std::vector<PseudoId> contact_query(PartySet& parties,
                                    std::span<const PseudoId> seeds,
                                    const QueryParams& params,
                                    std::int32_t query_day);

struct TraceResult {
  struct Hit {
    PseudoId pseudo_id;
    std::uint32_t generation = 1;
  };
  std::vector<Hit> hits;  // deduplicated, smallest generation kept
};

// The subscriber-side mapping the servers themselves never hold: all
// tokens issued to the owner of a given token. Identified contacts
// query with their full token set in the next generation, exactly as
// a diagnosed patient seeds with all of theirs.
class TokenDirectory {
 public:
  virtual ~TokenDirectory() = default;
  // Empty when no subscriber knows the token.
  virtual std::vector<PseudoId> owner_tokens(PseudoId token) const = 0;
};

// Breadth-first fixpoint: every generation's identified contacts are
// treated as new query inputs until nothing new is found (or the cap
// is hit). With a directory, a found token pulls in its owner's whole
// token set; without one the found tokens alone seed the next round.
TraceResult multi_generation_query(PartySet& parties,
                                   std::span<const PseudoId> seeds,
                                   const QueryParams& params,
                                   std::int32_t query_day,
                                   const TokenDirectory* directory = nullptr);

// Every subscriber receives the full id list; returns how many
// end-user notifications matched anywhere.
std::size_t broadcast_results(
    const TraceResult& result,
    std::span<subscriber::SubscriberRegistry* const> subscribers);

}  // namespace prevent::orchestration
