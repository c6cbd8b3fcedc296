#include "prevent/tracing_server.hpp"

#include <istream>
#include <ostream>

#include "prevent/errors.hpp"

namespace prevent::server {

namespace {

constexpr std::uint32_t kSnapshotMagic = 0x50564e54;  // "PVNT"
constexpr std::uint32_t kSnapshotVersion = 1;
constexpr std::uint32_t kSecondsPerDay = 86400;

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>(v >> (8 * i));
  out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw ProtocolError("snapshot truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

mpc::FieldElement get_field(std::istream& in) {
  const std::uint64_t raw = get_u64(in);
  if (raw >= mpc::FieldElement::kModulus) {
    throw ProtocolError("snapshot holds an out-of-field word");
  }
  return mpc::FieldElement::reduce(raw);
}

void write_node(std::ostream& out, const TreeNode& node) {
  put_u64(out, node.level);
  put_u64(out, node.entries.size());
  for (const TreeNode::Entry& entry : node.entries) {
    put_u64(out, entry.representative_share.value());
    if (node.level > 1) {
      write_node(out, *entry.child);
    } else {
      put_u64(out, entry.leaf->records.size());
      for (const RecordEntry& r : entry.leaf->records) {
        put_u64(out, r.pseudo_id.hi);
        put_u64(out, r.pseudo_id.lo);
        put_u64(out, r.t_share.value());
        put_u64(out, r.x_share.value());
        put_u64(out, r.y_share.value());
      }
    }
  }
}

void read_node(std::istream& in, TreeNode& node) {
  node.level = static_cast<std::uint32_t>(get_u64(in));
  const std::uint64_t count = get_u64(in);
  node.entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    TreeNode::Entry entry;
    entry.representative_share = get_field(in);
    if (node.level > 1) {
      entry.child = std::make_unique<TreeNode>();
      read_node(in, *entry.child);
    } else {
      entry.leaf = std::make_unique<LeafGroup>();
      const std::uint64_t records = get_u64(in);
      entry.leaf->records.reserve(records);
      for (std::uint64_t k = 0; k < records; ++k) {
        RecordEntry r;
        r.pseudo_id.hi = get_u64(in);
        r.pseudo_id.lo = get_u64(in);
        r.t_share = get_field(in);
        r.x_share = get_field(in);
        r.y_share = get_field(in);
        entry.leaf->records.push_back(r);
      }
    }
    node.entries.push_back(std::move(entry));
  }
}

void rebuild_index(DayStore& store, TreeNode& node) {
  for (TreeNode::Entry& entry : node.entries) {
    if (node.level > 1) {
      rebuild_index(store, *entry.child);
    } else {
      for (std::uint32_t pos = 0; pos < entry.leaf->records.size(); ++pos) {
        store.index_record(
            entry.leaf->records[pos].pseudo_id,
            RecordRef{store.day(), entry.leaf.get(), pos});
      }
    }
  }
}

void digest_node(const TreeNode& node, std::uint64_t& h) {
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  mix(node.level);
  mix(node.entries.size());
  for (const TreeNode::Entry& entry : node.entries) {
    if (node.level > 1) {
      digest_node(*entry.child, h);
    } else {
      mix(entry.leaf->records.size());
      for (const RecordEntry& r : entry.leaf->records) {
        mix(r.pseudo_id.hi);
        mix(r.pseudo_id.lo);
      }
    }
  }
}

void collect_leaves(const TreeNode& node,
                    std::vector<const LeafGroup*>& leaves) {
  for (const TreeNode::Entry& entry : node.entries) {
    if (node.level > 1) {
      collect_leaves(*entry.child, leaves);
    } else {
      leaves.push_back(entry.leaf.get());
    }
  }
}

}  // namespace

void DayStore::index_record(PseudoId id, RecordRef ref) {
  if (!index_.emplace(id, ref).second) {
    throw PseudoIdReuse("pseudo id already stored for this day");
  }
}

DayStore& TracingServer::day_store(std::int32_t day) {
  auto it = days_.find(day);
  if (it == days_.end()) {
    it = days_.emplace(day, DayStore(day, levels_)).first;
  }
  return it->second;
}

const DayStore* TracingServer::find_day(std::int32_t day) const {
  auto it = days_.find(day);
  return it == days_.end() ? nullptr : &it->second;
}

std::vector<std::int32_t> TracingServer::stored_days() const {
  std::vector<std::int32_t> out;
  out.reserve(days_.size());
  for (const auto& [day, store] : days_) out.push_back(day);
  return out;
}

std::vector<TracingServer::PatientRecord> TracingServer::lookup_patient(
    PseudoId id, std::int32_t first_day, std::int32_t last_day) const {
  std::vector<PatientRecord> out;
  for (const auto& [day, store] : days_) {
    if (day < first_day || day > last_day) continue;
    if (const RecordRef* ref = store.find(id)) {
      out.push_back(PatientRecord{day, *ref});
    }
  }
  return out;
}

std::vector<std::int32_t> TracingServer::retire_old_days(
    std::int32_t today, std::uint32_t retention_days) {
  const std::int32_t oldest_kept =
      today - static_cast<std::int32_t>(retention_days) + 1;
  std::vector<std::int32_t> purged;
  for (auto it = days_.begin(); it != days_.end();) {
    if (it->first < oldest_kept) {
      purged.push_back(it->first);
      it = days_.erase(it);
    } else {
      ++it;
    }
  }
  return purged;
}

std::uint64_t TracingServer::shape_digest() const {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (const auto& [day, store] : days_) {
    h ^= static_cast<std::uint64_t>(day) * 0x100000001b3ULL;
    digest_node(store.root(), h);
  }
  return h;
}

std::size_t TracingServer::record_count() const {
  std::size_t n = 0;
  for (const auto& [day, store] : days_) n += store.record_count();
  return n;
}

void TracingServer::snapshot_to(std::ostream& out) const {
  put_u64(out, (static_cast<std::uint64_t>(kSnapshotVersion) << 32) |
                   kSnapshotMagic);
  put_u64(out, party_);
  put_u64(out, levels_);
  put_u64(out, days_.size());
  for (const auto& [day, store] : days_) {
    put_u64(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(day)));
    write_node(out, store.root());
  }
}

TracingServer TracingServer::restore_from(std::istream& in) {
  const std::uint64_t header = get_u64(in);
  if ((header & 0xffffffffULL) != kSnapshotMagic) {
    throw ProtocolError("not a server snapshot");
  }
  if ((header >> 32) != kSnapshotVersion) {
    throw ProtocolError("unsupported snapshot version");
  }
  const auto party = static_cast<mpc::PartyId>(get_u64(in));
  const auto levels = static_cast<std::uint32_t>(get_u64(in));
  TracingServer server(party, levels);
  const std::uint64_t day_count = get_u64(in);
  for (std::uint64_t i = 0; i < day_count; ++i) {
    const auto day =
        static_cast<std::int32_t>(static_cast<std::int64_t>(get_u64(in)));
    DayStore& store = server.day_store(day);
    read_node(in, store.root());
    if (store.root().level != levels) {
      throw ProtocolError("snapshot tree level mismatch");
    }
    rebuild_index(store, store.root());
  }
  return server;
}

void TracingServer::dump_index_csv(std::ostream& out) const {
  out << "day,pseudo_id,leaf,position\n";
  for (const auto& [day, store] : days_) {
    std::vector<const LeafGroup*> leaves;
    collect_leaves(store.root(), leaves);
    for (std::size_t leaf_ordinal = 0; leaf_ordinal < leaves.size();
         ++leaf_ordinal) {
      const LeafGroup* leaf = leaves[leaf_ordinal];
      for (std::uint32_t pos = 0; pos < leaf->records.size(); ++pos) {
        out << day << ',' << leaf->records[pos].pseudo_id.to_hex() << ','
            << leaf_ordinal << ',' << pos << '\n';
      }
    }
  }
}

RecordRef insert_report(std::span<TracingServer> servers,
                        std::span<const client::LocationReport> reports,
                        std::int32_t day, mpc::MpcContext& ctx) {
  const std::uint32_t n = static_cast<std::uint32_t>(servers.size());
  if (n < 2 || reports.size() != n || ctx.parties() != n) {
    throw ProtocolError("insert needs one report per server");
  }
  const std::uint32_t levels = servers[0].levels();
  const PseudoId id = reports[0].pseudo_id;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (reports[i].pseudo_id != id) {
      throw ProtocolError("reports of one insert carry different pseudo ids");
    }
    if (reports[i].server_index != i + 1) {
      throw ProtocolError("report delivered to the wrong server");
    }
    if (reports[i].gid_shares.size() != levels) {
      throw ProtocolError("report gid share count does not match the grid");
    }
  }

  // Reject before any mutation so a duplicate leaves every store
  // untouched.
  std::vector<DayStore*> stores(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    stores[i] = &servers[i].day_store(day);
    if (stores[i]->contains(id)) {
      throw PseudoIdReuse("pseudo id already stored for this day");
    }
  }

  std::vector<TreeNode*> cursor(n);
  for (std::uint32_t i = 0; i < n; ++i) cursor[i] = &stores[i]->root();

  std::vector<LeafGroup*> leaves(n, nullptr);
  for (std::uint32_t level = levels; level >= 1; --level) {
    const std::size_t entry_count = cursor[0]->entries.size();
    for (std::uint32_t i = 1; i < n; ++i) {
      if (cursor[i]->entries.size() != entry_count) {
        throw ProtocolError("server trees lost shape congruence");
      }
    }

    // Deterministic scan in insertion order; every server takes the
    // same branch because the zero test opens the same sum everywhere.
    std::size_t match = entry_count;
    for (std::size_t k = 0; k < entry_count; ++k) {
      mpc::SharedValue difference(n);
      for (std::uint32_t i = 0; i < n; ++i) {
        difference[i] = reports[i].gid_shares[level - 1] -
                        cursor[i]->entries[k].representative_share;
      }
      if (mpc::eq_zero_open(ctx, difference).is_zero) {
        match = k;
        break;
      }
    }

    if (match == entry_count) {
      for (std::uint32_t i = 0; i < n; ++i) {
        TreeNode::Entry entry;
        entry.representative_share = reports[i].gid_shares[level - 1];
        if (level > 1) {
          entry.child = std::make_unique<TreeNode>();
          entry.child->level = level - 1;
        } else {
          entry.leaf = std::make_unique<LeafGroup>();
        }
        cursor[i]->entries.push_back(std::move(entry));
      }
    }

    if (level > 1) {
      for (std::uint32_t i = 0; i < n; ++i) {
        cursor[i] = cursor[i]->entries[match].child.get();
      }
    } else {
      for (std::uint32_t i = 0; i < n; ++i) {
        leaves[i] = cursor[i]->entries[match].leaf.get();
      }
    }
  }

  RecordRef ref0;
  for (std::uint32_t i = 0; i < n; ++i) {
    leaves[i]->records.push_back(RecordEntry{id, reports[i].t_share,
                                             reports[i].x_share,
                                             reports[i].y_share});
    const RecordRef ref{
        day, leaves[i],
        static_cast<std::uint32_t>(leaves[i]->records.size() - 1)};
    stores[i]->index_record(id, ref);
    if (i == 0) ref0 = ref;
  }
  return ref0;
}

bool compare_records(std::span<const LeafGroup* const> leaves,
                     std::uint32_t patient_pos, std::uint32_t candidate_pos,
                     const ComparePolicy& policy, mpc::MpcContext& ctx) {
  const std::uint32_t n = static_cast<std::uint32_t>(leaves.size());
  if (n != ctx.parties()) {
    throw ProtocolError("comparison needs every server's leaf");
  }

  mpc::SharedValue dx(n), dy(n), dt(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const RecordEntry& patient = leaves[i]->records[patient_pos];
    const RecordEntry& candidate = leaves[i]->records[candidate_pos];
    dx[i] = candidate.x_share - patient.x_share;
    dy[i] = candidate.y_share - patient.y_share;
    dt[i] = candidate.t_share - patient.t_share;
  }

  // Squaring clears the hidden sign, so the squared distance compares
  // against the public D^2 alone.
  mpc::SharedValue distance_sq =
      mpc::add(mpc::secure_mul(ctx, dx, dx), mpc::secure_mul(ctx, dy, dy));
  const std::uint64_t d_sq = static_cast<std::uint64_t>(policy.distance_cm) *
                             static_cast<std::uint64_t>(policy.distance_cm);
  if (!mpc::secure_less_than(ctx, distance_sq,
                             mpc::FieldElement::reduce(d_sq + 1))) {
    return false;
  }

  // Time gap: shift by a day so both directions are non-negative, then
  // one bounded comparison per direction.
  const mpc::FieldElement window =
      mpc::FieldElement::reduce(static_cast<std::uint64_t>(policy.tau_seconds) +
                                kSecondsPerDay + 1);
  if (!mpc::secure_less_than(
          ctx,
          mpc::add_public(dt, mpc::FieldElement::reduce(kSecondsPerDay)),
          window)) {
    return false;
  }
  if (policy.symmetric_window) {
    return mpc::secure_less_than(
        ctx,
        mpc::public_minus(mpc::FieldElement::reduce(kSecondsPerDay), dt),
        window);
  }
  return true;
}

}  // namespace prevent::server
