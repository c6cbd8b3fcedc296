#pragma once

#include <cstdint>

namespace prevent::analytics {

// Inputs for the flat (no-tree) query cost model. Trajectory length
// and cell width share one unit.
struct CostModelInput {
  double users = 0;                     // stored user count
  double mean_locations_per_user = 0;   // stored locations per user
  double mean_trajectory_length = 0;    // trajectory length
  double query_location_count = 0;      // locations in the query trajectory
  double side = 0;                      // bounding square side
  double cell_width = 0;                // lowest-level cell width
};

// Expected comparisons against a single-level grid:
// users * locs_per_user * trajectory_length * cell_width / side^2.
double query_cost_flat(const CostModelInput& input);

// Comparisons for one query against a two-level partitioning:
// query_locations * (regions + cells + users/(regions*cells)), with
// the per-cell occupancy rounded to the nearest integer as in the
// published example arithmetic.
std::uint64_t query_cost_tree(std::uint64_t query_locations,
                              std::uint64_t regions, std::uint64_t cells,
                              std::uint64_t users);

struct Partition {
  std::uint64_t regions = 1;
  std::uint64_t cells = 1;
  bool operator==(const Partition&) const = default;
};

// Balanced two-level partitioning: regions = cells = cbrt(users),
// rounded to the neighboring integer with the lower exact query cost.
Partition plan_partition(std::uint64_t users);

// Chance of tying one received share to a real identity by guessing:
// 1 / (pseudo-id domain * real-id domain).
double theorem1_bound(std::uint64_t pseudo_id_domain,
                      std::uint64_t real_id_domain);

// Chance of placing one stored share into the right lowest-level cell.
double theorem2_bound(std::uint64_t lowest_level_cells);

struct LocationInferenceBound {
  double probability = 0;
  double log10_probability = 0;
};

// Chance of mapping q reported shares onto the right cells around a
// known outbreak: the inverse of the ordered assignment count
// (4*Nv^2) * (4*Nv^2 - 1) * ... over q picks, evaluated in log space
// so huge cell counts cannot overflow.
LocationInferenceBound theorem3_probability(std::uint64_t intercepted_cells,
                                            std::uint64_t reported_locations);

}  // namespace prevent::analytics
