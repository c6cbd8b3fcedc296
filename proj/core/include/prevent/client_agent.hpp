#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "prevent/grid.hpp"
#include "prevent/pseudo_id.hpp"
#include "prevent/shares.hpp"

namespace prevent::client {

// One positioning fix, whatever the collection channel was.
struct RawFix {
  std::uint32_t t_seconds = 0;  // seconds of day
  grid::PlanarPoint p;
};

// A location the user dwelled at for at least the infectious window.
struct StayPoint {
  std::uint32_t arrival_seconds = 0;
  grid::PlanarPoint p;
  bool operator==(const StayPoint&) const = default;
};

// Maximal non-overlapping dwell episodes: a run of fixes within
// `radius_cm` of its first fix lasting at least `dwell_seconds`,
// reported as the episode centroid stamped with the arrival time.
std::vector<StayPoint> detect_stay_points(std::span<const RawFix> fixes,
                                          std::uint32_t dwell_seconds,
                                          std::int64_t radius_cm);

// Tokens handed out by one subscriber, consumed front to back.
class PseudoIdPool {
 public:
  PseudoIdPool() = default;
  PseudoIdPool(std::string issued_by, std::vector<PseudoId> ids)
      : issued_by_(std::move(issued_by)), ids_(std::move(ids)) {}

  const std::string& issued_by() const { return issued_by_; }
  const std::vector<PseudoId>& ids() const { return ids_; }
  std::size_t remaining() const { return ids_.size() - next_; }

  PseudoId draw();

 private:
  std::string issued_by_;
  std::vector<PseudoId> ids_;
  std::size_t next_ = 0;
};

// The per-server message for one stay point (or border replica):
// a fresh token plus shares of time, coordinates and every level's
// grid id. Nothing in here identifies the user.
struct LocationReport {
  PseudoId pseudo_id;
  std::uint32_t server_index = 1;  // 1-based, matches the receiving server
  mpc::FieldElement t_share;
  mpc::FieldElement x_share;
  mpc::FieldElement y_share;
  std::vector<mpc::FieldElement> gid_shares;  // index 0 = level 1
};

// One user-day of traffic, grouped by destination server. Message k
// of every per-server batch belongs to the same message set (same
// pseudo id), which is what lets the servers insert in lockstep.
struct DayReportBatches {
  std::vector<std::vector<LocationReport>> per_server;
  std::size_t message_sets = 0;
};

// Runs the end-of-day packaging: a primary message set per stay point
// plus one per border replica, each under its own token with shares
// drawn fresh, then one shuffle so arrival order carries no visit
// order. Throws OutOfPseudoIds before consuming anything if the pool
// cannot cover the day.
DayReportBatches build_day_reports(std::span<const StayPoint> stays,
                                   PseudoIdPool& pool,
                                   const grid::GridConfig& config,
                                   std::int64_t infectious_distance_cm,
                                   std::uint32_t servers,
                                   mpc::SeededRng& rng);

// CSV fixes: header user_id,day,t_seconds,x_cm,y_cm.
struct FixRow {
  std::string user_id;
  std::int32_t day = 0;
  RawFix fix;
};
std::vector<FixRow> load_fixes_csv(std::istream& in);
void save_fixes_csv(std::ostream& out, std::span<const FixRow> rows);

// JSON-lines reports: hex tokens, decimal field elements.
void save_reports_jsonl(std::ostream& out,
                        std::span<const LocationReport> reports);
std::vector<LocationReport> load_reports_jsonl(std::istream& in);

}  // namespace prevent::client
