#include <map>
#include <memory>
#include <sstream>

#include "doctest.h"
#include "prevent/errors.hpp"
#include "prevent/tracing_server.hpp"
#include "prevent/workload.hpp"

using namespace prevent;
using grid::GridConfig;
using grid::PlanarPoint;
using mpc::FieldElement;
using mpc::MpcContext;
using mpc::SeededRng;

namespace {

GridConfig test_grid() {
  GridConfig config;
  config.side_cm = 10000;
  config.cell_widths_cm = {1000, 5000};
  config.validate();
  return config;
}

std::vector<client::LocationReport> make_reports(PseudoId id, std::uint32_t t,
                                                 PlanarPoint p,
                                                 const GridConfig& config,
                                                 std::uint32_t servers,
                                                 SeededRng& rng) {
  const grid::CellPath path = grid::cell_path(p, config);
  const mpc::SharedValue ts = mpc::share(FieldElement::reduce(t), servers, rng);
  const mpc::SharedValue xs =
      mpc::share(FieldElement::from_signed(p.x), servers, rng);
  const mpc::SharedValue ys =
      mpc::share(FieldElement::from_signed(p.y), servers, rng);
  std::vector<mpc::SharedValue> gids;
  for (std::uint64_t g : path.gids) {
    gids.push_back(mpc::share(FieldElement::reduce(g), servers, rng));
  }
  std::vector<client::LocationReport> reports(servers);
  for (std::uint32_t s = 0; s < servers; ++s) {
    reports[s].pseudo_id = id;
    reports[s].server_index = s + 1;
    reports[s].t_share = ts[s];
    reports[s].x_share = xs[s];
    reports[s].y_share = ys[s];
    for (const mpc::SharedValue& g : gids) reports[s].gid_shares.push_back(g[s]);
  }
  return reports;
}

std::vector<server::TracingServer> make_servers(std::uint32_t n,
                                                std::uint32_t levels) {
  std::vector<server::TracingServer> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) out.emplace_back(i, levels);
  return out;
}

// Plaintext shadow of the secret-shared tree: grouped by real grid
// ids under the same first-visit ordering.
struct ShadowNode {
  std::vector<std::pair<std::uint64_t, std::unique_ptr<ShadowNode>>> children;
  std::vector<PseudoId> records;
};

void shadow_insert(ShadowNode& root, const grid::CellPath& path, PseudoId id) {
  ShadowNode* node = &root;
  for (std::size_t level = path.gids.size(); level >= 1; --level) {
    const std::uint64_t g = path.gids[level - 1];
    ShadowNode* next = nullptr;
    for (auto& [gid, child] : node->children) {
      if (gid == g) {
        next = child.get();
        break;
      }
    }
    if (next == nullptr) {
      node->children.emplace_back(g, std::make_unique<ShadowNode>());
      next = node->children.back().second.get();
    }
    node = next;
  }
  node->records.push_back(id);
}

void check_congruent(const server::TreeNode& node, const ShadowNode& shadow) {
  REQUIRE(node.entries.size() == shadow.children.size());
  for (std::size_t k = 0; k < node.entries.size(); ++k) {
    if (node.level > 1) {
      check_congruent(*node.entries[k].child, *shadow.children[k].second);
    } else {
      const server::LeafGroup& leaf = *node.entries[k].leaf;
      const ShadowNode& expected = *shadow.children[k].second;
      REQUIRE(leaf.records.size() == expected.records.size());
      for (std::size_t i = 0; i < leaf.records.size(); ++i) {
        CHECK(leaf.records[i].pseudo_id == expected.records[i]);
      }
    }
  }
}

}  // namespace

TEST_CASE("first insert builds a fresh chain down to one record") {
  const GridConfig config = test_grid();
  std::vector<server::TracingServer> servers = make_servers(3, 2);
  MpcContext ctx(3, 5);
  SeededRng rng(1);

  const PseudoId id{1, 2};
  const auto reports =
      make_reports(id, 100, PlanarPoint{2500, 2500}, config, 3, rng);
  const server::RecordRef ref = server::insert_report(servers, reports, 0, ctx);
  CHECK(ref.day == 0);
  CHECK(ref.position == 0);

  for (const server::TracingServer& srv : servers) {
    const server::DayStore* store = srv.find_day(0);
    REQUIRE(store != nullptr);
    CHECK(store->root().entries.size() == 1);
    CHECK(store->root().entries[0].child->entries.size() == 1);
    CHECK(store->root().entries[0].child->entries[0].leaf->records.size() == 1);
    CHECK(store->record_count() == 1);
  }
  // A fresh-path insert opens no equality rounds at all.
  CHECK(ctx.counters().equality_tests == 0);
}

TEST_CASE("same-cell reports share a leaf without new entries") {
  const GridConfig config = test_grid();
  std::vector<server::TracingServer> servers = make_servers(2, 2);
  MpcContext ctx(2, 6);
  SeededRng rng(2);

  server::insert_report(servers,
                        make_reports(PseudoId{1, 1}, 50,
                                     PlanarPoint{2500, 2500}, config, 2, rng),
                        0, ctx);
  server::insert_report(servers,
                        make_reports(PseudoId{1, 2}, 70,
                                     PlanarPoint{2600, 2400}, config, 2, rng),
                        0, ctx);

  const server::DayStore* store = servers[0].find_day(0);
  CHECK(store->root().entries.size() == 1);
  CHECK(store->root().entries[0].child->entries.size() == 1);
  CHECK(store->root().entries[0].child->entries[0].leaf->records.size() == 2);
  // Two matches => two equality rounds (one per level).
  CHECK(ctx.counters().equality_tests == 2);
}

TEST_CASE("random insertion sequences stay congruent with the shadow tree") {
  const GridConfig config = test_grid();
  std::vector<server::TracingServer> servers = make_servers(3, 2);
  MpcContext ctx(3, 7);
  SeededRng rng(3);

  ShadowNode shadow;
  for (std::uint32_t i = 0; i < 600; ++i) {
    const PseudoId id{i, 0xabc};
    const PlanarPoint p{static_cast<std::int64_t>(rng.below(10000)),
                        static_cast<std::int64_t>(rng.below(10000))};
    const auto reports = make_reports(id, i, p, config, 3, rng);
    server::insert_report(servers, reports, 0, ctx);
    shadow_insert(shadow, grid::cell_path(p, config), id);
  }

  for (const server::TracingServer& srv : servers) {
    check_congruent(srv.find_day(0)->root(), shadow);
  }
  CHECK(servers[0].shape_digest() == servers[1].shape_digest());
  CHECK(servers[0].shape_digest() == servers[2].shape_digest());
}

TEST_CASE("pseudo id reuse rejects atomically") {
  const GridConfig config = test_grid();
  std::vector<server::TracingServer> servers = make_servers(2, 2);
  MpcContext ctx(2, 8);
  SeededRng rng(4);

  const PseudoId id{9, 9};
  server::insert_report(
      servers, make_reports(id, 10, PlanarPoint{100, 100}, config, 2, rng), 3,
      ctx);
  const std::uint64_t digest = servers[0].shape_digest();

  CHECK_THROWS_AS(
      server::insert_report(
          servers,
          make_reports(id, 99, PlanarPoint{8000, 200}, config, 2, rng), 3,
          ctx),
      PseudoIdReuse);
  CHECK(servers[0].shape_digest() == digest);
  CHECK(servers[0].record_count() == 1);
  CHECK(servers[1].record_count() == 1);

  // Same token on another day is a fresh insert, not a reuse.
  server::insert_report(
      servers, make_reports(id, 99, PlanarPoint{8000, 200}, config, 2, rng), 4,
      ctx);
  CHECK(servers[0].record_count() == 2);
}

TEST_CASE("malformed reports are protocol errors") {
  const GridConfig config = test_grid();
  std::vector<server::TracingServer> servers = make_servers(2, 2);
  MpcContext ctx(2, 9);
  SeededRng rng(5);

  auto reports =
      make_reports(PseudoId{3, 3}, 10, PlanarPoint{100, 100}, config, 2, rng);
  reports[1].gid_shares.pop_back();
  CHECK_THROWS_AS(server::insert_report(servers, reports, 0, ctx),
                  ProtocolError);

  auto mismatched =
      make_reports(PseudoId{4, 4}, 10, PlanarPoint{100, 100}, config, 2, rng);
  mismatched[1].pseudo_id = PseudoId{5, 5};
  CHECK_THROWS_AS(server::insert_report(servers, mismatched, 0, ctx),
                  ProtocolError);
}

TEST_CASE("patient lookup spans retained days") {
  const GridConfig config = test_grid();
  std::vector<server::TracingServer> servers = make_servers(2, 2);
  MpcContext ctx(2, 10);
  SeededRng rng(6);

  CHECK(servers[0].lookup_patient(PseudoId{1, 1}, 0, 100).empty());

  const PseudoId shared_id{8, 8};
  for (std::int32_t day : {1, 2, 3}) {
    server::insert_report(
        servers,
        make_reports(shared_id, 20, PlanarPoint{700, 700}, config, 2, rng),
        day + 10, ctx);
  }
  CHECK(servers[0].lookup_patient(shared_id, 0, 100).size() == 3);
  CHECK(servers[0].lookup_patient(shared_id, 12, 13).size() == 2);
  CHECK(servers[0].lookup_patient(shared_id, 14, 20).empty());
}

TEST_CASE("secure record comparison agrees with the plaintext predicate") {
  std::vector<server::LeafGroup> leaves(3);
  SeededRng rng(7);
  MpcContext ctx(3, 11);
  const server::ComparePolicy policy{200, 3600, true};

  auto add_record = [&](std::uint32_t t, std::int64_t x, std::int64_t y) {
    const mpc::SharedValue ts = mpc::share(FieldElement::reduce(t), 3, rng);
    const mpc::SharedValue xs =
        mpc::share(FieldElement::from_signed(x), 3, rng);
    const mpc::SharedValue ys =
        mpc::share(FieldElement::from_signed(y), 3, rng);
    for (std::uint32_t s = 0; s < 3; ++s) {
      leaves[s].records.push_back(
          server::RecordEntry{PseudoId{}, ts[s], xs[s], ys[s]});
    }
  };
  std::vector<const server::LeafGroup*> handles{&leaves[0], &leaves[1],
                                                &leaves[2]};

  struct Case {
    std::uint32_t t0, t1;
    std::int64_t x0, y0, x1, y1;
    bool expect;
  };
  const Case cases[] = {
      {1000, 1000, 500, 500, 500, 500, true},   // identical
      {1000, 1000, 500, 500, 700, 500, true},   // distance exactly D
      {1000, 1000, 500, 500, 701, 500, false},  // one centimeter too far
      {1000, 4600, 500, 500, 500, 500, true},   // gap exactly tau
      {1000, 4601, 500, 500, 500, 500, false},  // a second too long
      {4601, 1000, 500, 500, 500, 500, false},  // symmetric: earlier too
      {1000, 1000, 500, 500, 641, 641, true},   // diagonal inside D
      {1000, 1000, 500, 500, 642, 642, false},  // diagonal outside D
  };
  for (const Case& c : cases) {
    leaves[0].records.clear();
    leaves[1].records.clear();
    leaves[2].records.clear();
    add_record(c.t0, c.x0, c.y0);
    add_record(c.t1, c.x1, c.y1);
    CHECK(server::compare_records(handles, 0, 1, policy, ctx) == c.expect);
  }
}

TEST_CASE("secure record comparison matches a random plaintext sweep") {
  std::vector<server::LeafGroup> leaves(2);
  SeededRng rng(8);
  MpcContext ctx(2, 12);
  const server::ComparePolicy policy{300, 1800, true};

  int contacts = 0;
  for (int i = 0; i < 2000; ++i) {
    leaves[0].records.clear();
    leaves[1].records.clear();
    const std::uint32_t t0 = static_cast<std::uint32_t>(rng.below(86400));
    const std::uint32_t t1 = static_cast<std::uint32_t>(rng.below(86400));
    const std::int64_t x0 = static_cast<std::int64_t>(rng.below(2000));
    const std::int64_t y0 = static_cast<std::int64_t>(rng.below(2000));
    std::int64_t x1, y1;
    // Half the pairs land near each other so both outcomes get real
    // coverage.
    if (rng.coin()) {
      x1 = std::max<std::int64_t>(
          0, x0 + static_cast<std::int64_t>(rng.below(700)) - 350);
      y1 = std::max<std::int64_t>(
          0, y0 + static_cast<std::int64_t>(rng.below(700)) - 350);
    } else {
      x1 = static_cast<std::int64_t>(rng.below(2000));
      y1 = static_cast<std::int64_t>(rng.below(2000));
    }
    const std::uint32_t gap = t0 > t1 ? t0 - t1 : t1 - t0;
    const std::int64_t dx = x1 - x0;
    const std::int64_t dy = y1 - y0;
    const bool expect = dx * dx + dy * dy <= 300 * 300 && gap <= 1800;
    contacts += expect ? 1 : 0;

    const mpc::SharedValue t0s = mpc::share(FieldElement::reduce(t0), 2, rng);
    const mpc::SharedValue x0s =
        mpc::share(FieldElement::from_signed(x0), 2, rng);
    const mpc::SharedValue y0s =
        mpc::share(FieldElement::from_signed(y0), 2, rng);
    const mpc::SharedValue t1s = mpc::share(FieldElement::reduce(t1), 2, rng);
    const mpc::SharedValue x1s =
        mpc::share(FieldElement::from_signed(x1), 2, rng);
    const mpc::SharedValue y1s =
        mpc::share(FieldElement::from_signed(y1), 2, rng);
    for (std::uint32_t s = 0; s < 2; ++s) {
      leaves[s].records.push_back(
          server::RecordEntry{PseudoId{}, t0s[s], x0s[s], y0s[s]});
      leaves[s].records.push_back(
          server::RecordEntry{PseudoId{}, t1s[s], x1s[s], y1s[s]});
    }
    std::vector<const server::LeafGroup*> handles{&leaves[0], &leaves[1]};
    CHECK(server::compare_records(handles, 0, 1, policy, ctx) == expect);
  }
  CHECK(contacts > 100);  // both branches actually exercised
}

TEST_CASE("one-sided window keeps arbitrarily earlier candidates") {
  std::vector<server::LeafGroup> leaves(2);
  SeededRng rng(9);
  MpcContext ctx(2, 13);
  server::ComparePolicy policy{200, 3600, false};

  auto fill = [&](std::uint32_t t_patient, std::uint32_t t_candidate) {
    leaves[0].records.clear();
    leaves[1].records.clear();
    const mpc::SharedValue tp =
        mpc::share(FieldElement::reduce(t_patient), 2, rng);
    const mpc::SharedValue tc =
        mpc::share(FieldElement::reduce(t_candidate), 2, rng);
    const mpc::SharedValue x = mpc::share(FieldElement::reduce(100), 2, rng);
    const mpc::SharedValue y = mpc::share(FieldElement::reduce(100), 2, rng);
    const mpc::SharedValue x2 = mpc::share(FieldElement::reduce(100), 2, rng);
    const mpc::SharedValue y2 = mpc::share(FieldElement::reduce(100), 2, rng);
    for (std::uint32_t s = 0; s < 2; ++s) {
      leaves[s].records.push_back(
          server::RecordEntry{PseudoId{}, tp[s], x[s], y[s]});
      leaves[s].records.push_back(
          server::RecordEntry{PseudoId{}, tc[s], x2[s], y2[s]});
    }
  };
  std::vector<const server::LeafGroup*> handles{&leaves[0], &leaves[1]};

  // Candidate long before the patient: kept one-sided, dropped symmetric.
  fill(80000, 1000);
  CHECK(server::compare_records(handles, 0, 1, policy, ctx));
  policy.symmetric_window = true;
  fill(80000, 1000);
  CHECK_FALSE(server::compare_records(handles, 0, 1, policy, ctx));
  // Candidate too late fails both ways.
  policy.symmetric_window = false;
  fill(1000, 80000);
  CHECK_FALSE(server::compare_records(handles, 0, 1, policy, ctx));
}

TEST_CASE("old day stores retire on schedule") {
  server::TracingServer srv(0, 2);
  for (std::int32_t day = 0; day < 15; ++day) srv.day_store(day);
  CHECK(srv.stored_days().size() == 15);

  const auto purged = srv.retire_old_days(14, 14);
  REQUIRE(purged.size() == 1);
  CHECK(purged[0] == 0);
  CHECK(srv.stored_days().size() == 14);

  CHECK(srv.retire_old_days(14, 14).empty());  // idempotent
  CHECK(srv.retire_old_days(14, 20).empty());
}

TEST_CASE("snapshots restore losslessly") {
  const GridConfig config = test_grid();
  std::vector<server::TracingServer> servers = make_servers(2, 2);
  MpcContext ctx(2, 14);
  SeededRng rng(10);

  for (std::uint32_t i = 0; i < 200; ++i) {
    server::insert_report(
        servers,
        make_reports(PseudoId{i, 1}, i,
                     PlanarPoint{static_cast<std::int64_t>(rng.below(10000)),
                                 static_cast<std::int64_t>(rng.below(10000))},
                     config, 2, rng),
        static_cast<std::int32_t>(i % 3), ctx);
  }

  std::stringstream buffer;
  servers[0].snapshot_to(buffer);
  const server::TracingServer restored =
      server::TracingServer::restore_from(buffer);
  CHECK(restored.party() == 0);
  CHECK(restored.levels() == 2);
  CHECK(restored.record_count() == servers[0].record_count());
  CHECK(restored.shape_digest() == servers[0].shape_digest());
  CHECK(restored.lookup_patient(PseudoId{42, 1}, 0, 10).size() == 1);

  // Re-serialization is byte identical.
  std::stringstream again;
  restored.snapshot_to(again);
  CHECK(again.str() == buffer.str());

  std::stringstream garbage("not a snapshot at all");
  CHECK_THROWS_AS(server::TracingServer::restore_from(garbage), ProtocolError);
}

TEST_CASE("index dump lists every stored record") {
  const GridConfig config = test_grid();
  std::vector<server::TracingServer> servers = make_servers(2, 2);
  MpcContext ctx(2, 15);
  SeededRng rng(11);
  for (std::uint32_t i = 0; i < 5; ++i) {
    server::insert_report(
        servers,
        make_reports(PseudoId{i, 2}, i, PlanarPoint{100 + i * 970, 200},
                     config, 2, rng),
        0, ctx);
  }
  std::stringstream csv;
  servers[0].dump_index_csv(csv);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "day,pseudo_id,leaf,position");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 5);
}
