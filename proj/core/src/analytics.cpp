#include "prevent/analytics.hpp"

#include <cmath>

#include "prevent/errors.hpp"

namespace prevent::analytics {

namespace {

using u128 = unsigned __int128;

std::uint64_t integer_cbrt(std::uint64_t n) {
  std::uint64_t r = static_cast<std::uint64_t>(std::cbrt(static_cast<double>(n)));
  while (r > 0 && static_cast<u128>(r) * r * r > n) --r;
  while (static_cast<u128>(r + 1) * (r + 1) * (r + 1) <= n) ++r;
  return r;
}

// Exact comparison of f(r) = 2r + users/r^2 between two candidates.
bool tree_cost_less(std::uint64_t r1, std::uint64_t r2, std::uint64_t users) {
  const u128 s1 = static_cast<u128>(r1) * r1;
  const u128 s2 = static_cast<u128>(r2) * r2;
  const u128 lhs = 2 * static_cast<u128>(r1) * s1 * s2 + static_cast<u128>(users) * s2;
  const u128 rhs = 2 * static_cast<u128>(r2) * s2 * s1 + static_cast<u128>(users) * s1;
  return lhs < rhs;
}

}  // namespace

double query_cost_flat(const CostModelInput& input) {
  if (input.side <= 0) throw InvalidInput("side must be positive");
  if (input.cell_width <= 0) throw InvalidInput("cell width must be positive");
  return input.users * input.mean_locations_per_user *
         input.mean_trajectory_length * input.cell_width /
         (input.side * input.side);
}

std::uint64_t query_cost_tree(std::uint64_t query_locations,
                              std::uint64_t regions, std::uint64_t cells,
                              std::uint64_t users) {
  if (regions == 0 || cells == 0) {
    throw InvalidInput("partition counts must be at least 1");
  }
  const u128 groups = static_cast<u128>(regions) * cells;
  const u128 occupancy = (static_cast<u128>(users) + groups / 2) / groups;
  const u128 total =
      static_cast<u128>(query_locations) * (regions + cells + occupancy);
  if (total > static_cast<u128>(UINT64_MAX)) {
    throw InvalidInput("query cost overflows 64 bits");
  }
  return static_cast<std::uint64_t>(total);
}

Partition plan_partition(std::uint64_t users) {
  if (users == 0) throw InvalidInput("planner needs at least 1 user");
  const std::uint64_t root = integer_cbrt(users);

  // Nearest integer to the exact cube root: compare 8*users against
  // (2*root + 1)^3 without floating point.
  const u128 midpoint_cubed =
      static_cast<u128>(2 * root + 1) * (2 * root + 1) * (2 * root + 1);
  std::uint64_t nearest = root;
  if (8 * static_cast<u128>(users) > midpoint_cubed) nearest = root + 1;
  if (nearest == 0) nearest = 1;

  // Settle between the floor and ceiling candidates by exact cost;
  // ties keep the nearest rounding.
  std::uint64_t best = nearest;
  for (std::uint64_t candidate :
       {root > 1 ? root - 1 : 1, root, root + 1}) {
    if (candidate != best && tree_cost_less(candidate, best, users)) {
      best = candidate;
    }
  }
  return Partition{best, best};
}

double theorem1_bound(std::uint64_t pseudo_id_domain,
                      std::uint64_t real_id_domain) {
  if (pseudo_id_domain == 0 || real_id_domain == 0) {
    throw InvalidInput("identity domains must be non-empty");
  }
  return 1.0 / (static_cast<double>(pseudo_id_domain) *
                static_cast<double>(real_id_domain));
}

double theorem2_bound(std::uint64_t lowest_level_cells) {
  if (lowest_level_cells == 0) {
    throw InvalidInput("cell count must be positive");
  }
  return 1.0 / static_cast<double>(lowest_level_cells);
}

LocationInferenceBound theorem3_probability(std::uint64_t intercepted_cells,
                                            std::uint64_t reported_locations) {
  if (intercepted_cells == 0) {
    throw InvalidInput("intercepted cell count must be positive");
  }
  const u128 area_cells_wide =
      4 * static_cast<u128>(intercepted_cells) * intercepted_cells;
  if (static_cast<u128>(reported_locations) > area_cells_wide) {
    throw InvalidInput("more reported locations than candidate cells");
  }

  LocationInferenceBound out;
  double log10_sum = 0;
  for (std::uint64_t j = 0; j < reported_locations; ++j) {
    log10_sum += std::log10(
        static_cast<double>(area_cells_wide - static_cast<u128>(j)));
  }
  out.log10_probability = -log10_sum;
  out.probability = std::pow(10.0, out.log10_probability);
  return out;
}

}  // namespace prevent::analytics
