#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prevent/client_agent.hpp"
#include "prevent/grid.hpp"
#include "prevent/orchestration.hpp"

namespace prevent::harness {

// A contact chain planted into the workload: user_indices[0] meets
// user_indices[1], who meets user_indices[2], and so on, each link
// exactly the infectious distance and window apart so only adjacent
// links are in contact.
struct PlantedChain {
  std::int32_t day = 0;
  std::vector<std::uint32_t> user_indices;
};

// Synthetic trajectory workload: clustered stay regions (hotspots plus
// a uniform background) with dwell episodes long enough to register as
// stay points, one trajectory per user per day.
struct WorkloadSpec {
  std::uint32_t users = 100;
  std::uint32_t days = 7;
  std::uint32_t max_locs_per_day = 10;
  std::uint64_t seed = 1;
  grid::GridConfig grid;
  orchestration::QueryParams params;
  std::uint32_t retention_days = 0;  // 0 = keep every generated day

  std::uint32_t hotspot_count = 20;
  double hotspot_fraction = 0.7;
  std::int64_t hotspot_spread_cm = 1500;

  std::uint32_t pool_size = 64;       // tokens issued per user-day
  std::uint32_t stay_radius_cm = 500; // dwell radius for detection

  std::vector<PlantedChain> chains;

  void validate() const;
  std::uint32_t effective_retention() const {
    return retention_days == 0 ? days : retention_days;
  }

  std::string to_json() const;
  static WorkloadSpec from_json(const std::string& text);
  static WorkloadSpec load(const std::string& path);
};

// A generated stay episode with its owner: the generator's ground
// truth, recorded independently of the detector that later has to
// find exactly these.
struct TruthStay {
  std::uint32_t user = 0;
  std::int32_t day = 0;
  client::StayPoint stay;
};

struct GeneratedWorkload {
  std::vector<client::FixRow> fixes;  // ordered by (user, day, time)
  std::vector<TruthStay> truth;
};

GeneratedWorkload generate_workload(const WorkloadSpec& spec);

std::string real_id_for(std::uint32_t user);

// Desk-scale grids mirroring the published experiment setups:
// 12 m cells under a 3-level hierarchy, and 120 m cells under 2.
grid::GridConfig desk_grid_small_cells();
grid::GridConfig desk_grid_large_cells();

// GeoLife plain-text trajectories (PLT files under <root>/<user>/
// Trajectory/), projected onto a local planar frame in centimeters.
std::vector<client::FixRow> import_geolife(const std::string& root_dir);

}  // namespace prevent::harness
