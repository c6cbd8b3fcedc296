#include "prevent/grid.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "prevent/errors.hpp"

namespace prevent::grid {

void GridConfig::validate() const {
  if (side_cm <= 0) throw InvalidInput("grid side must be positive");
  if (side_cm > kMaxSideCm) {
    throw InvalidInput("grid side exceeds the field comparison range");
  }
  if (cell_widths_cm.size() < 2) {
    throw InvalidInput("grid needs at least 2 levels");
  }
  for (std::size_t i = 0; i < cell_widths_cm.size(); ++i) {
    if (cell_widths_cm[i] <= 0) throw InvalidInput("cell width must be positive");
    if (i > 0 && cell_widths_cm[i] % cell_widths_cm[i - 1] != 0) {
      throw InvalidInput("each cell width must divide the next level's width");
    }
  }
  if (side_cm % cell_widths_cm.back() != 0) {
    throw InvalidInput("top-level cell width must divide the side");
  }
}

GridConfig GridConfig::parse(std::istream& in) {
  GridConfig config;
  std::size_t declared_levels = 0;
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;

    auto trim = [](std::string s) {
      const char* ws = " \t\r";
      s.erase(0, s.find_first_not_of(ws));
      const std::size_t last = s.find_last_not_of(ws);
      s.erase(last == std::string::npos ? 0 : last + 1);
      return s;
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "origin_x_cm") {
        config.origin_x_cm = std::stoll(value);
      } else if (key == "origin_y_cm") {
        config.origin_y_cm = std::stoll(value);
      } else if (key == "side_cm") {
        config.side_cm = std::stoll(value);
      } else if (key == "levels") {
        declared_levels = static_cast<std::size_t>(std::stoull(value));
      } else if (key == "cell_widths_cm") {
        std::stringstream parts(value);
        std::string item;
        while (std::getline(parts, item, ',')) {
          config.cell_widths_cm.push_back(std::stoll(trim(item)));
        }
      } else {
        throw InvalidInput("unknown grid config key: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw InvalidInput("bad grid config value for key: " + key);
    } catch (const std::out_of_range&) {
      throw InvalidInput("grid config value out of range for key: " + key);
    }
  }
  if (declared_levels != config.cell_widths_cm.size()) {
    throw InvalidInput("levels does not match cell_widths_cm length");
  }
  config.validate();
  return config;
}

GridConfig GridConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open grid config: " + path);
  return parse(in);
}

void GridConfig::save(std::ostream& out) const {
  out << "origin_x_cm = " << origin_x_cm << "\n";
  out << "origin_y_cm = " << origin_y_cm << "\n";
  out << "side_cm = " << side_cm << "\n";
  out << "levels = " << cell_widths_cm.size() << "\n";
  out << "cell_widths_cm = ";
  for (std::size_t i = 0; i < cell_widths_cm.size(); ++i) {
    if (i > 0) out << ", ";
    out << cell_widths_cm[i];
  }
  out << "\n";
}

void GridConfig::store(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write grid config: " + path);
  save(out);
}

PlanarPoint offset_coords(std::int64_t raw_x_cm, std::int64_t raw_y_cm,
                          const GridConfig& config) {
  const std::int64_t x = raw_x_cm - config.origin_x_cm;
  const std::int64_t y = raw_y_cm - config.origin_y_cm;
  if (x < 0 || y < 0 || x > config.side_cm || y > config.side_cm) {
    throw PointOutsideServiceArea("fix lies outside the service square");
  }
  return PlanarPoint{x, y};
}

namespace {

std::int64_t clamped_index(std::int64_t coord, std::int64_t width,
                           std::int64_t per_side) {
  const std::int64_t idx = coord / width;
  return idx >= per_side ? per_side - 1 : idx;
}

}  // namespace

std::uint64_t gid(PlanarPoint p, std::uint32_t level,
                  const GridConfig& config) {
  const std::int64_t w = config.width_at(level);
  const std::int64_t per_side = config.cells_per_side(level);
  const std::int64_t col = clamped_index(p.x, w, per_side);
  const std::int64_t row = clamped_index(p.y, w, per_side);
  return static_cast<std::uint64_t>(col) +
         static_cast<std::uint64_t>(row) * static_cast<std::uint64_t>(per_side);
}

CellPath cell_path(PlanarPoint p, const GridConfig& config) {
  CellPath path;
  path.gids.reserve(config.levels());
  for (std::uint32_t level = 1; level <= config.levels(); ++level) {
    path.gids.push_back(gid(p, level, config));
  }
  return path;
}

std::vector<CellPath> border_replicas(PlanarPoint p, const GridConfig& config,
                                      std::int64_t infectious_distance_cm) {
  const std::int64_t w = config.width_at(1);
  const std::int64_t per_side = config.cells_per_side(1);
  const std::int64_t col = clamped_index(p.x, w, per_side);
  const std::int64_t row = clamped_index(p.y, w, per_side);
  const std::int64_t d_sq = infectious_distance_cm * infectious_distance_cm;

  std::vector<CellPath> replicas;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const std::int64_t ncol = col + dx;
      const std::int64_t nrow = row + dy;
      if (ncol < 0 || nrow < 0 || ncol >= per_side || nrow >= per_side) {
        continue;
      }
      // Distance from p to the neighbor's closed rectangle.
      const std::int64_t gap_x =
          dx < 0 ? p.x - col * w : (dx > 0 ? (col + 1) * w - p.x : 0);
      const std::int64_t gap_y =
          dy < 0 ? p.y - row * w : (dy > 0 ? (row + 1) * w - p.y : 0);
      const std::int64_t gap_sq = gap_x * gap_x + gap_y * gap_y;
      // Replicate when the border is within half the infectious
      // distance: 4*gap^2 <= D^2 keeps the test in integers.
      if (4 * gap_sq <= d_sq) {
        replicas.push_back(
            cell_path(PlanarPoint{ncol * w, nrow * w}, config));
      }
    }
  }
  return replicas;
}

}  // namespace prevent::grid
