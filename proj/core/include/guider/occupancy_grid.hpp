#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "guider/errors.hpp"

namespace guider {

enum class CellState : std::uint8_t { Free = 0, Unknown = 1, Occupied = 2 };

/// Discretized world map in the global frame. `origin` is the world position
/// of the *corner* of cell (0,0); cell centers sit at origin + (i+0.5)*res.
struct OccupancyGrid {
    int width = 0;
    int height = 0;
    double resolution = 0.05; // meters per cell
    double origin_x = 0.0;
    double origin_y = 0.0;
    std::vector<CellState> cells;

    OccupancyGrid() = default;
    OccupancyGrid(int w, int h, double res, double ox, double oy,
                  CellState fill = CellState::Free)
        : width(w), height(h), resolution(res), origin_x(ox), origin_y(oy),
          cells(static_cast<std::size_t>(w) * h, fill) {}

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * width + x;
    }
    CellState& at(int x, int y) { return cells[index(x, y)]; }
    CellState at(int x, int y) const { return cells[index(x, y)]; }
    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }

    double cell_center_x(int x) const { return origin_x + (x + 0.5) * resolution; }
    double cell_center_y(int y) const { return origin_y + (y + 0.5) * resolution; }

    /// Cell containing world point (wx, wy); no bounds check.
    int cell_x_of(double wx) const {
        return static_cast<int>(std::floor((wx - origin_x) / resolution));
    }
    int cell_y_of(double wy) const {
        return static_cast<int>(std::floor((wy - origin_y) / resolution));
    }

    void validate() const {
        if (width < 1 || height < 1) throw ConfigError("OccupancyGrid: empty grid");
        if (!(resolution > 0.0)) throw ConfigError("OccupancyGrid: resolution must be > 0");
        if (cells.size() != static_cast<std::size_t>(width) * height)
            throw ConfigError("OccupancyGrid: cell buffer size mismatch");
    }
};

/// Grid file format: P5 PGM plus a `<pgm>.meta` key-value sidecar carrying
/// resolution, origin_x/origin_y, and the gray-level thresholds
/// (occupied_max, free_min) that map pixel values to the tristate:
/// gray <= occupied_max -> occupied; gray >= free_min -> free; else unknown.
OccupancyGrid load_occupancy_grid(const std::filesystem::path& pgm_path,
                                  const std::filesystem::path& meta_path);
void save_occupancy_grid(const OccupancyGrid& grid,
                         const std::filesystem::path& pgm_path,
                         const std::filesystem::path& meta_path);

} // namespace guider
