#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "guider/pointcloud.hpp"

namespace guider::io {

/// ASCII PLY: x y z, optionally followed by nx ny nz.
struct PlyCloud {
    geom::PointCloud cloud;
    std::optional<std::vector<Eigen::Vector3d>> normals;
};

PlyCloud read_ply(const std::filesystem::path& path);
void write_ply(const geom::PointCloud& cloud,
               const std::vector<Eigen::Vector3d>* normals,
               const std::filesystem::path& path);

} // namespace guider::io
