#include "prevent/workload.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "prevent/errors.hpp"

namespace prevent::harness {

namespace {

constexpr std::uint32_t kSecondsPerDay = 86400;
constexpr std::uint32_t kSlotMargin = 60;
constexpr std::uint32_t kChainBase = 600;
constexpr std::uint32_t kRandomStartWithChain = 43200;

struct ChainStay {
  std::uint32_t arrival = 0;
  grid::PlanarPoint p;
};

std::int64_t squared_distance(grid::PlanarPoint a, grid::PlanarPoint b) {
  const std::int64_t dx = a.x - b.x;
  const std::int64_t dy = a.y - b.y;
  return dx * dx + dy * dy;
}

}  // namespace

void WorkloadSpec::validate() const {
  grid.validate();
  params.validate(grid);
  if (users == 0) throw InvalidInput("workload needs at least 1 user");
  if (days == 0) throw InvalidInput("workload needs at least 1 day");
  if (max_locs_per_day == 0) {
    throw InvalidInput("workload needs at least 1 location per day");
  }
  if (static_cast<std::uint64_t>(max_locs_per_day) *
          (params.infectious_window_s + kSlotMargin) >
      kRandomStartWithChain) {
    throw InvalidInput("stay episodes do not fit into a day");
  }
  // Border replicas can triple a message set; the pool has to cover
  // the worst case.
  if (pool_size < 4ULL * max_locs_per_day) {
    throw InvalidInput("pool size cannot cover max replicas per day");
  }
  for (const PlantedChain& chain : chains) {
    if (chain.user_indices.size() < 2) {
      throw InvalidInput("planted chain needs at least 2 users");
    }
    if (chain.day < 0 || chain.day >= static_cast<std::int32_t>(days)) {
      throw InvalidInput("planted chain day out of range");
    }
    for (std::uint32_t u : chain.user_indices) {
      if (u >= users) throw InvalidInput("planted chain user out of range");
    }
    const std::uint64_t chain_end =
        kChainBase +
        static_cast<std::uint64_t>(chain.user_indices.size() - 1) *
            params.infectious_window_s +
        params.infectious_window_s + kSlotMargin;
    if (chain_end > kRandomStartWithChain) {
      throw InvalidInput("planted chain does not fit into the morning");
    }
    const std::int64_t span =
        static_cast<std::int64_t>(chain.user_indices.size()) *
        params.infectious_distance_cm;
    if (span >= grid.side_cm) {
      throw InvalidInput("planted chain does not fit into the square");
    }
  }
}

GeneratedWorkload generate_workload(const WorkloadSpec& spec) {
  spec.validate();
  const std::int64_t side = spec.grid.side_cm;
  const std::uint32_t dwell = spec.params.infectious_window_s;
  mpc::SeededRng base(spec.seed);

  // Shared hotspot centers.
  mpc::SeededRng hotspot_rng = base.fork(1);
  std::vector<grid::PlanarPoint> hotspots;
  hotspots.reserve(spec.hotspot_count);
  for (std::uint32_t h = 0; h < spec.hotspot_count; ++h) {
    hotspots.push_back(grid::PlanarPoint{
        static_cast<std::int64_t>(hotspot_rng.below(side)),
        static_cast<std::int64_t>(hotspot_rng.below(side))});
  }

  // Chain placements: link k sits exactly D right of link k-1 and
  // exactly one infectious window later, so only neighbors touch.
  std::map<std::pair<std::int32_t, std::uint32_t>, std::vector<ChainStay>>
      chain_stays;
  mpc::SeededRng chain_rng = base.fork(2);
  for (const PlantedChain& chain : spec.chains) {
    const std::int64_t span =
        static_cast<std::int64_t>(chain.user_indices.size()) *
        spec.params.infectious_distance_cm;
    const std::int64_t anchor_x =
        static_cast<std::int64_t>(chain_rng.below(side - span));
    const std::int64_t anchor_y = static_cast<std::int64_t>(chain_rng.below(side));
    for (std::size_t k = 0; k < chain.user_indices.size(); ++k) {
      ChainStay stay;
      stay.arrival = kChainBase + static_cast<std::uint32_t>(k) * dwell;
      stay.p = grid::PlanarPoint{
          anchor_x + static_cast<std::int64_t>(k) *
                         spec.params.infectious_distance_cm,
          anchor_y};
      chain_stays[{chain.day, chain.user_indices[k]}].push_back(stay);
    }
  }

  GeneratedWorkload out;
  const std::int64_t min_gap_sq = 4 * spec.stay_radius_cm * spec.stay_radius_cm;

  for (std::uint32_t user = 0; user < spec.users; ++user) {
    mpc::SeededRng user_rng = base.fork(3).fork(user);
    for (std::int32_t day = 0; day < static_cast<std::int32_t>(spec.days);
         ++day) {
      mpc::SeededRng rng = user_rng.fork(static_cast<std::uint64_t>(day));

      std::vector<ChainStay> episodes;
      auto planted = chain_stays.find({day, user});
      if (planted != chain_stays.end()) episodes = planted->second;
      const std::size_t planted_count = episodes.size();

      std::uint32_t total = 1 + static_cast<std::uint32_t>(
                                     rng.below(spec.max_locs_per_day));
      const std::uint32_t random_count =
          total > planted_count
              ? total - static_cast<std::uint32_t>(planted_count)
              : 0;

      const std::uint32_t window_start =
          planted_count > 0 ? kRandomStartWithChain : 0;
      if (random_count > 0) {
        const std::uint32_t slot =
            (kSecondsPerDay - window_start) / random_count;
        for (std::uint32_t i = 0; i < random_count; ++i) {
          ChainStay episode;
          episode.arrival =
              window_start + i * slot +
              static_cast<std::uint32_t>(rng.below(slot - dwell - kSlotMargin));
          for (;;) {
            grid::PlanarPoint p;
            if (rng.unit() < spec.hotspot_fraction && !hotspots.empty()) {
              const grid::PlanarPoint center = hotspots[static_cast<std::size_t>(
                  rng.below(hotspots.size()))];
              const std::int64_t spread = spec.hotspot_spread_cm;
              p.x = center.x + static_cast<std::int64_t>(rng.below(2 * spread + 1)) -
                    spread;
              p.y = center.y + static_cast<std::int64_t>(rng.below(2 * spread + 1)) -
                    spread;
              p.x = std::clamp<std::int64_t>(p.x, 0, side - 1);
              p.y = std::clamp<std::int64_t>(p.y, 0, side - 1);
            } else {
              p.x = static_cast<std::int64_t>(rng.below(side));
              p.y = static_cast<std::int64_t>(rng.below(side));
            }
            bool clear = true;
            for (const ChainStay& other : episodes) {
              if (squared_distance(p, other.p) <= min_gap_sq) {
                clear = false;
                break;
              }
            }
            if (clear) {
              episode.p = p;
              break;
            }
          }
          episodes.push_back(episode);
        }
      }

      std::sort(episodes.begin(), episodes.end(),
                [](const ChainStay& a, const ChainStay& b) {
                  return a.arrival < b.arrival;
                });

      // Ground truth first, then the fixes a detector must reduce to
      // exactly that truth: three co-located fixes per episode plus a
      // mid-travel fix between episodes.
      const std::string real_id = real_id_for(user);
      for (std::size_t e = 0; e < episodes.size(); ++e) {
        const ChainStay& episode = episodes[e];
        out.truth.push_back(TruthStay{
            user, day, client::StayPoint{episode.arrival, episode.p}});

        if (e > 0) {
          const ChainStay& prev = episodes[e - 1];
          const std::uint32_t prev_end = prev.arrival + dwell;
          if (episode.arrival > prev_end + 1 &&
              squared_distance(prev.p, episode.p) > min_gap_sq) {
            out.fixes.push_back(client::FixRow{
                real_id, day,
                client::RawFix{(prev_end + episode.arrival) / 2,
                               grid::PlanarPoint{(prev.p.x + episode.p.x) / 2,
                                                 (prev.p.y + episode.p.y) / 2}}});
          }
        }
        out.fixes.push_back(client::FixRow{
            real_id, day, client::RawFix{episode.arrival, episode.p}});
        out.fixes.push_back(client::FixRow{
            real_id, day, client::RawFix{episode.arrival + dwell / 2, episode.p}});
        out.fixes.push_back(client::FixRow{
            real_id, day, client::RawFix{episode.arrival + dwell, episode.p}});
      }
    }
  }
  return out;
}

std::string real_id_for(std::uint32_t user) {
  return "u" + std::to_string(user);
}

grid::GridConfig desk_grid_small_cells() {
  grid::GridConfig grid;
  grid.side_cm = 120000;  // 1.2 km square
  grid.cell_widths_cm = {1200, 6000, 30000};
  grid.validate();
  return grid;
}

grid::GridConfig desk_grid_large_cells() {
  grid::GridConfig grid;
  grid.side_cm = 120000;
  grid.cell_widths_cm = {12000, 60000};
  grid.validate();
  return grid;
}

std::string WorkloadSpec::to_json() const {
  nlohmann::json j;
  j["users"] = users;
  j["days"] = days;
  j["max_locs_per_day"] = max_locs_per_day;
  j["seed"] = seed;
  j["retention_days"] = retention_days;
  j["hotspot_count"] = hotspot_count;
  j["hotspot_fraction"] = hotspot_fraction;
  j["hotspot_spread_cm"] = hotspot_spread_cm;
  j["pool_size"] = pool_size;
  j["stay_radius_cm"] = stay_radius_cm;
  j["grid"] = {{"origin_x_cm", grid.origin_x_cm},
               {"origin_y_cm", grid.origin_y_cm},
               {"side_cm", grid.side_cm},
               {"cell_widths_cm", grid.cell_widths_cm}};
  j["params"] = {{"distance_cm", params.infectious_distance_cm},
                 {"tau_s", params.infectious_window_s},
                 {"incubation_days", params.incubation_days},
                 {"symmetric_window", params.symmetric_window},
                 {"window_from_contact", params.window_from_contact}};
  nlohmann::json chain_list = nlohmann::json::array();
  for (const PlantedChain& chain : chains) {
    chain_list.push_back(
        {{"day", chain.day}, {"users", chain.user_indices}});
  }
  j["chains"] = std::move(chain_list);
  return j.dump(2);
}

WorkloadSpec WorkloadSpec::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InvalidInput("malformed workload spec JSON");
  WorkloadSpec spec;
  try {
    spec.users = j.at("users").get<std::uint32_t>();
    spec.days = j.at("days").get<std::uint32_t>();
    spec.max_locs_per_day = j.at("max_locs_per_day").get<std::uint32_t>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.retention_days = j.value("retention_days", 0u);
    spec.hotspot_count = j.value("hotspot_count", 20u);
    spec.hotspot_fraction = j.value("hotspot_fraction", 0.7);
    spec.hotspot_spread_cm = j.value("hotspot_spread_cm", std::int64_t{1500});
    spec.pool_size = j.value("pool_size", 64u);
    spec.stay_radius_cm = j.value("stay_radius_cm", 500u);
    const auto& grid = j.at("grid");
    spec.grid.origin_x_cm = grid.value("origin_x_cm", std::int64_t{0});
    spec.grid.origin_y_cm = grid.value("origin_y_cm", std::int64_t{0});
    spec.grid.side_cm = grid.at("side_cm").get<std::int64_t>();
    spec.grid.cell_widths_cm =
        grid.at("cell_widths_cm").get<std::vector<std::int64_t>>();
    const auto& params = j.at("params");
    spec.params.infectious_distance_cm =
        params.at("distance_cm").get<std::int64_t>();
    spec.params.infectious_window_s = params.at("tau_s").get<std::uint32_t>();
    spec.params.incubation_days =
        params.at("incubation_days").get<std::uint32_t>();
    spec.params.symmetric_window = params.value("symmetric_window", true);
    spec.params.window_from_contact =
        params.value("window_from_contact", false);
    for (const auto& chain : j.value("chains", nlohmann::json::array())) {
      PlantedChain planted;
      planted.day = chain.at("day").get<std::int32_t>();
      planted.user_indices =
          chain.at("users").get<std::vector<std::uint32_t>>();
      spec.chains.push_back(std::move(planted));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("workload spec misses a field: ") +
                       e.what());
  }
  spec.validate();
  return spec;
}

WorkloadSpec WorkloadSpec::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open workload spec: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

std::vector<client::FixRow> import_geolife(const std::string& root_dir) {
  namespace fs = std::filesystem;
  struct RawRow {
    std::string user;
    double lat, lon, serial_days;
  };
  std::vector<RawRow> raw;

  std::vector<fs::path> users;
  for (const auto& entry : fs::directory_iterator(root_dir)) {
    if (entry.is_directory()) users.push_back(entry.path());
  }
  std::sort(users.begin(), users.end());

  for (const fs::path& user_dir : users) {
    const fs::path traj = user_dir / "Trajectory";
    if (!fs::exists(traj)) continue;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(traj)) {
      if (entry.path().extension() == ".plt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& file : files) {
      std::ifstream in(file);
      std::string line;
      for (int skip = 0; skip < 6 && std::getline(in, line); ++skip) {
      }
      while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string lat_s, lon_s, zero, alt, serial;
        if (!std::getline(ss, lat_s, ',') || !std::getline(ss, lon_s, ',') ||
            !std::getline(ss, zero, ',') || !std::getline(ss, alt, ',') ||
            !std::getline(ss, serial, ',')) {
          continue;
        }
        try {
          raw.push_back(RawRow{user_dir.filename().string(),
                               std::stod(lat_s), std::stod(lon_s),
                               std::stod(serial)});
        } catch (const std::exception&) {
          continue;  // malformed row
        }
      }
    }
  }
  if (raw.empty()) return {};

  double min_lat = raw[0].lat, min_lon = raw[0].lon;
  double min_day = raw[0].serial_days;
  for (const RawRow& row : raw) {
    min_lat = std::min(min_lat, row.lat);
    min_lon = std::min(min_lon, row.lon);
    min_day = std::min(min_day, row.serial_days);
  }
  const double lat_scale_cm = 111320.0 * 100.0;  // meters per degree * cm
  const double lon_scale_cm =
      lat_scale_cm * std::cos(min_lat * 3.14159265358979323846 / 180.0);

  std::vector<client::FixRow> out;
  out.reserve(raw.size());
  for (const RawRow& row : raw) {
    client::FixRow fix;
    fix.user_id = row.user;
    const double day_offset = row.serial_days - std::floor(min_day);
    fix.day = static_cast<std::int32_t>(std::floor(day_offset));
    fix.fix.t_seconds = static_cast<std::uint32_t>(
        std::llround((day_offset - std::floor(day_offset)) * 86400.0));
    if (fix.fix.t_seconds >= 86400) fix.fix.t_seconds = 86399;
    fix.fix.p.x =
        static_cast<std::int64_t>(std::llround((row.lon - min_lon) * lon_scale_cm));
    fix.fix.p.y =
        static_cast<std::int64_t>(std::llround((row.lat - min_lat) * lat_scale_cm));
    out.push_back(std::move(fix));
  }
  std::sort(out.begin(), out.end(),
            [](const client::FixRow& a, const client::FixRow& b) {
              if (a.user_id != b.user_id) return a.user_id < b.user_id;
              if (a.day != b.day) return a.day < b.day;
              return a.fix.t_seconds < b.fix.t_seconds;
            });
  return out;
}

}  // namespace prevent::harness
