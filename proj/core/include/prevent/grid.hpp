#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace prevent::grid {

// Fixed-point centimeter coordinates in the service frame, [0, W].
struct PlanarPoint {
  std::int64_t x = 0;
  std::int64_t y = 0;
  bool operator==(const PlanarPoint&) const = default;
};

// Hierarchical equal-cell partitioning of the minimum bounding square.
// Level 1 is the finest; every width divides the next one up, and the
// top width divides the side, so cells nest exactly.
struct GridConfig {
  std::int64_t origin_x_cm = 0;
  std::int64_t origin_y_cm = 0;
  std::int64_t side_cm = 0;
  std::vector<std::int64_t> cell_widths_cm;  // index 0 = level 1

  // Squared coordinate spans above this would overflow the comparison
  // contract of the field protocols.
  static constexpr std::int64_t kMaxSideCm = (1LL << 29) - 1;

  std::uint32_t levels() const {
    return static_cast<std::uint32_t>(cell_widths_cm.size());
  }
  std::int64_t width_at(std::uint32_t level) const {
    return cell_widths_cm[level - 1];
  }
  std::int64_t cells_per_side(std::uint32_t level) const {
    return side_cm / width_at(level);
  }
  std::uint64_t cell_count(std::uint32_t level) const {
    const std::uint64_t k = static_cast<std::uint64_t>(cells_per_side(level));
    return k * k;
  }

  void validate() const;

  static GridConfig parse(std::istream& in);
  static GridConfig load(const std::string& path);
  void save(std::ostream& out) const;
  void store(const std::string& path) const;
};

// One grid id per level, finest first; each level's cell contains the
// previous one.
struct CellPath {
  std::vector<std::uint64_t> gids;  // index 0 = level 1
  bool operator==(const CellPath&) const = default;
};

// Translates raw deployment coordinates into the service frame.
// Throws PointOutsideServiceArea when the fix is off the square.
PlanarPoint offset_coords(std::int64_t raw_x_cm, std::int64_t raw_y_cm,
                          const GridConfig& config);

// Row-major cell id at one level: floor(x/w) + floor(y/w) * (W/w).
// Points on the far edge (x == W or y == W) count into the last cell.
std::uint64_t gid(PlanarPoint p, std::uint32_t level,
                  const GridConfig& config);

CellPath cell_path(PlanarPoint p, const GridConfig& config);

// Paths of the level-1 neighbor cells whose closed rectangle lies
// within D/2 of p: one for an edge crossing, three at a corner.
// Neighbors outside the square are skipped.
std::vector<CellPath> border_replicas(PlanarPoint p, const GridConfig& config,
                                      std::int64_t infectious_distance_cm);

}  // namespace prevent::grid
