#include "guider/occupancy_grid.hpp"

#include "guider/io/pgm_io.hpp"

namespace guider {

namespace {
constexpr std::uint8_t kFreeGray = 254;
constexpr std::uint8_t kUnknownGray = 205;
constexpr std::uint8_t kOccupiedGray = 0;
} // namespace

OccupancyGrid load_occupancy_grid(const std::filesystem::path& pgm_path,
                                  const std::filesystem::path& meta_path) {
    const auto img = io::read_pgm8(pgm_path);
    const auto meta = io::read_keyvalue(meta_path);

    auto fetch = [&](const char* key) -> double {
        const auto it = meta.find(key);
        if (it == meta.end())
            throw IoError(std::string("grid meta missing key '") + key + "': " + meta_path.string());
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw IoError(std::string("grid meta bad value for '") + key + "'");
        }
    };

    OccupancyGrid grid(img.width, img.height, fetch("resolution"),
                       fetch("origin_x"), fetch("origin_y"));
    const int occupied_max = static_cast<int>(fetch("occupied_max"));
    const int free_min = static_cast<int>(fetch("free_min"));
    if (occupied_max >= free_min)
        throw IoError("grid meta: occupied_max must be below free_min");

    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const int g = img.data[i];
        grid.cells[i] = (g <= occupied_max) ? CellState::Occupied
                      : (g >= free_min)     ? CellState::Free
                                            : CellState::Unknown;
    }
    grid.validate();
    return grid;
}

void save_occupancy_grid(const OccupancyGrid& grid,
                         const std::filesystem::path& pgm_path,
                         const std::filesystem::path& meta_path) {
    grid.validate();
    Image<std::uint8_t> img(grid.width, grid.height);
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        switch (grid.cells[i]) {
        case CellState::Free: img.data[i] = kFreeGray; break;
        case CellState::Unknown: img.data[i] = kUnknownGray; break;
        case CellState::Occupied: img.data[i] = kOccupiedGray; break;
        }
    }
    io::write_pgm8(img, pgm_path);

    std::map<std::string, std::string> meta;
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    meta["resolution"] = fmt(grid.resolution);
    meta["origin_x"] = fmt(grid.origin_x);
    meta["origin_y"] = fmt(grid.origin_y);
    meta["occupied_max"] = "100";
    meta["free_min"] = "200";
    io::write_keyvalue(meta, meta_path);
}

} // namespace guider
