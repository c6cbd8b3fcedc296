#include "prevent/client_agent.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "prevent/errors.hpp"

namespace prevent::client {

namespace {

std::int64_t squared_distance(grid::PlanarPoint a, grid::PlanarPoint b) {
  const std::int64_t dx = a.x - b.x;
  const std::int64_t dy = a.y - b.y;
  return dx * dx + dy * dy;
}

}  // namespace

std::vector<StayPoint> detect_stay_points(std::span<const RawFix> fixes,
                                          std::uint32_t dwell_seconds,
                                          std::int64_t radius_cm) {
  for (std::size_t i = 1; i < fixes.size(); ++i) {
    if (fixes[i].t_seconds < fixes[i - 1].t_seconds) {
      throw InvalidSequence("fixes must be time-ordered");
    }
  }

  const std::int64_t radius_sq = radius_cm * radius_cm;
  std::vector<StayPoint> stays;
  std::size_t i = 0;
  while (i < fixes.size()) {
    std::size_t j = i;
    while (j + 1 < fixes.size() &&
           squared_distance(fixes[i].p, fixes[j + 1].p) <= radius_sq) {
      ++j;
    }
    if (fixes[j].t_seconds - fixes[i].t_seconds >= dwell_seconds) {
      std::int64_t sum_x = 0;
      std::int64_t sum_y = 0;
      for (std::size_t k = i; k <= j; ++k) {
        sum_x += fixes[k].p.x;
        sum_y += fixes[k].p.y;
      }
      const std::int64_t count = static_cast<std::int64_t>(j - i + 1);
      stays.push_back(StayPoint{
          fixes[i].t_seconds,
          grid::PlanarPoint{(sum_x + count / 2) / count,
                            (sum_y + count / 2) / count}});
      i = j + 1;
    } else {
      ++i;
    }
  }
  return stays;
}

PseudoId PseudoIdPool::draw() {
  if (next_ >= ids_.size()) {
    throw OutOfPseudoIds("pseudo id pool exhausted");
  }
  return ids_[next_++];
}

DayReportBatches build_day_reports(std::span<const StayPoint> stays,
                                   PseudoIdPool& pool,
                                   const grid::GridConfig& config,
                                   std::int64_t infectious_distance_cm,
                                   std::uint32_t servers,
                                   mpc::SeededRng& rng) {
  if (servers < 2) {
    throw InvalidPartyCount("reports need at least 2 servers");
  }

  // Plan every message set first so pool exhaustion cannot leave a
  // half-built day behind.
  struct PlannedMessage {
    const StayPoint* stay;
    grid::CellPath path;
  };
  std::vector<PlannedMessage> plan;
  for (const StayPoint& stay : stays) {
    plan.push_back(PlannedMessage{&stay, grid::cell_path(stay.p, config)});
    for (grid::CellPath& replica :
         grid::border_replicas(stay.p, config, infectious_distance_cm)) {
      plan.push_back(PlannedMessage{&stay, std::move(replica)});
    }
  }
  if (plan.size() > pool.remaining()) {
    throw OutOfPseudoIds("day needs more pseudo ids than the pool holds");
  }

  DayReportBatches out;
  out.per_server.resize(servers);
  out.message_sets = plan.size();
  for (auto& batch : out.per_server) batch.reserve(plan.size());

  const std::uint32_t levels = config.levels();
  for (const PlannedMessage& message : plan) {
    const PseudoId id = pool.draw();
    const mpc::SharedValue t_shares = mpc::share(
        mpc::FieldElement::reduce(message.stay->arrival_seconds), servers, rng);
    const mpc::SharedValue x_shares = mpc::share(
        mpc::FieldElement::from_signed(message.stay->p.x), servers, rng);
    const mpc::SharedValue y_shares = mpc::share(
        mpc::FieldElement::from_signed(message.stay->p.y), servers, rng);
    std::vector<mpc::SharedValue> gid_shares;
    gid_shares.reserve(levels);
    for (std::uint32_t lev = 0; lev < levels; ++lev) {
      gid_shares.push_back(mpc::share(
          mpc::FieldElement::reduce(message.path.gids[lev]), servers, rng));
    }

    for (std::uint32_t s = 0; s < servers; ++s) {
      LocationReport report;
      report.pseudo_id = id;
      report.server_index = s + 1;
      report.t_share = t_shares[s];
      report.x_share = x_shares[s];
      report.y_share = y_shares[s];
      report.gid_shares.reserve(levels);
      for (std::uint32_t lev = 0; lev < levels; ++lev) {
        report.gid_shares.push_back(gid_shares[lev][s]);
      }
      out.per_server[s].push_back(std::move(report));
    }
  }

  // One permutation applied to every server's batch: arrival order is
  // decoupled from visit order while message sets stay aligned, which
  // is what the synchronized insertion protocol relies on.
  for (std::size_t k = plan.size(); k > 1; --k) {
    const std::size_t swap_with = static_cast<std::size_t>(rng.below(k));
    if (swap_with == k - 1) continue;
    for (auto& batch : out.per_server) {
      std::swap(batch[k - 1], batch[swap_with]);
    }
  }
  return out;
}

std::vector<FixRow> load_fixes_csv(std::istream& in) {
  std::vector<FixRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("user_id", 0) == 0) continue;  // header
    }
    std::stringstream ss(line);
    std::string field;
    FixRow row;
    try {
      if (!std::getline(ss, row.user_id, ',')) throw InvalidInput("");
      if (!std::getline(ss, field, ',')) throw InvalidInput("");
      row.day = static_cast<std::int32_t>(std::stol(field));
      if (!std::getline(ss, field, ',')) throw InvalidInput("");
      row.fix.t_seconds = static_cast<std::uint32_t>(std::stoul(field));
      if (!std::getline(ss, field, ',')) throw InvalidInput("");
      row.fix.p.x = std::stoll(field);
      if (!std::getline(ss, field, ',')) throw InvalidInput("");
      row.fix.p.y = std::stoll(field);
    } catch (const std::exception&) {
      throw InvalidInput("malformed fixes CSV line: " + line);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void save_fixes_csv(std::ostream& out, std::span<const FixRow> rows) {
  out << "user_id,day,t_seconds,x_cm,y_cm\n";
  for (const FixRow& row : rows) {
    out << row.user_id << ',' << row.day << ',' << row.fix.t_seconds << ','
        << row.fix.p.x << ',' << row.fix.p.y << '\n';
  }
}

void save_reports_jsonl(std::ostream& out,
                        std::span<const LocationReport> reports) {
  for (const LocationReport& r : reports) {
    nlohmann::json j;
    j["pseudo_id"] = r.pseudo_id.to_hex();
    j["server"] = r.server_index;
    j["t_share"] = std::to_string(r.t_share.value());
    j["x_share"] = std::to_string(r.x_share.value());
    j["y_share"] = std::to_string(r.y_share.value());
    nlohmann::json gids = nlohmann::json::array();
    for (const mpc::FieldElement& g : r.gid_shares) {
      gids.push_back(std::to_string(g.value()));
    }
    j["gid_shares"] = std::move(gids);
    out << j.dump() << '\n';
  }
}

std::vector<LocationReport> load_reports_jsonl(std::istream& in) {
  std::vector<LocationReport> reports;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw InvalidInput("malformed report JSON line");
    LocationReport r;
    try {
      r.pseudo_id = PseudoId::from_hex(j.at("pseudo_id").get<std::string>());
      r.server_index = j.at("server").get<std::uint32_t>();
      r.t_share = mpc::FieldElement::reduce(
          std::stoull(j.at("t_share").get<std::string>()));
      r.x_share = mpc::FieldElement::reduce(
          std::stoull(j.at("x_share").get<std::string>()));
      r.y_share = mpc::FieldElement::reduce(
          std::stoull(j.at("y_share").get<std::string>()));
      for (const auto& g : j.at("gid_shares")) {
        r.gid_shares.push_back(
            mpc::FieldElement::reduce(std::stoull(g.get<std::string>())));
      }
    } catch (const nlohmann::json::exception&) {
      throw InvalidInput("report JSON line misses a field");
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace prevent::client
