#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "prevent/client_agent.hpp"
#include "prevent/mpc.hpp"
#include "prevent/pseudo_id.hpp"

namespace prevent::server {

// One stored stay-point message: a token and three shares. The server
// holding this never sees anything but uniform field elements.
struct RecordEntry {
  PseudoId pseudo_id;
  mpc::FieldElement t_share;
  mpc::FieldElement x_share;
  mpc::FieldElement y_share;
};

// Records whose hidden locations fall in (or within D/2 of) one
// lowest-level grid cell.
struct LeafGroup {
  std::vector<RecordEntry> records;
};

// Internal node of the secret-shared space partitioning tree. Entries
// hold the representative share of the first user inserted for that
// (hidden) cell; the shape is identical on every server, only the
// share values differ.
struct TreeNode {
  struct Entry {
    mpc::FieldElement representative_share;
    std::unique_ptr<TreeNode> child;  // level > 1
    std::unique_ptr<LeafGroup> leaf;  // level == 1
  };

  std::uint32_t level = 1;
  std::vector<Entry> entries;
};

struct RecordRef {
  std::int32_t day = 0;
  LeafGroup* leaf = nullptr;
  std::uint32_t position = 0;
};

// One day's state: the pseudo-id lookup table plus the tree.
class DayStore {
 public:
  DayStore(std::int32_t day, std::uint32_t levels) : day_(day) {
    root_.level = levels;
  }

  std::int32_t day() const { return day_; }
  TreeNode& root() { return root_; }
  const TreeNode& root() const { return root_; }

  bool contains(PseudoId id) const { return index_.contains(id); }
  const RecordRef* find(PseudoId id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &it->second;
  }
  void index_record(PseudoId id, RecordRef ref);
  std::size_t record_count() const { return index_.size(); }
  const std::unordered_map<PseudoId, RecordRef, PseudoIdHash>& index() const {
    return index_;
  }

 private:
  std::int32_t day_;
  TreeNode root_;
  std::unordered_map<PseudoId, RecordRef, PseudoIdHash> index_;
};

// One logical PREVENT server: per-day stores for the retention
// horizon, plus the local half of every collaborative protocol. All
// mutation happens through the synchronous rounds the orchestrator
// drives.
class TracingServer {
 public:
  TracingServer(mpc::PartyId party, std::uint32_t levels)
      : party_(party), levels_(levels) {}

  mpc::PartyId party() const { return party_; }
  std::uint32_t levels() const { return levels_; }

  DayStore& day_store(std::int32_t day);
  const DayStore* find_day(std::int32_t day) const;
  std::vector<std::int32_t> stored_days() const;

  struct PatientRecord {
    std::int32_t day = 0;
    RecordRef ref;
  };
  // Every record stored under the token within [first_day, last_day],
  // oldest first. Unknown tokens yield an empty list.
  std::vector<PatientRecord> lookup_patient(PseudoId id,
                                            std::int32_t first_day,
                                            std::int32_t last_day) const;

  // Drops stores older than the retention horizon; returns the purged
  // day keys. Idempotent.
  std::vector<std::int32_t> retire_old_days(std::int32_t today,
                                            std::uint32_t retention_days);

  // Structure-only digest: equal across servers iff the tree shapes,
  // leaf sizes and stored token orders all agree.
  std::uint64_t shape_digest() const;

  std::size_t record_count() const;

  // Versioned binary snapshot, length-prefixed throughout.
  void snapshot_to(std::ostream& out) const;
  static TracingServer restore_from(std::istream& in);

  void dump_index_csv(std::ostream& out) const;

 private:
  mpc::PartyId party_;
  std::uint32_t levels_;
  std::map<std::int32_t, DayStore> days_;
};

// The collaborative insertion protocol, executed by all servers in
// lockstep: descend level by level, testing the report's gid share
// against each existing entry with a masked zero test; append a fresh
// entry chain where no level matches. No server learns a grid id.
// The returned ref is server 0's; shapes agree on every server.
RecordRef insert_report(std::span<TracingServer> servers,
                        std::span<const client::LocationReport> reports,
                        std::int32_t day, mpc::MpcContext& ctx);

struct ComparePolicy {
  std::int64_t distance_cm = 200;
  std::uint32_t tau_seconds = 3600;
  bool symmetric_window = true;
};

// Secure contact predicate between the patient's record and one
// candidate in the same leaf group: squared Euclidean distance at
// most D^2 and the time gap within the window. Only booleans and
// masked openings ever leave a server.
bool compare_records(std::span<const LeafGroup* const> leaves,
                     std::uint32_t patient_pos, std::uint32_t candidate_pos,
                     const ComparePolicy& policy, mpc::MpcContext& ctx);

}  // namespace prevent::server
