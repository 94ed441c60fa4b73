#pragma once

#include <cstdint>
#include <utility>

#include "guider/image.hpp"
#include "guider/pointcloud.hpp"

namespace guider::geom {

struct GeomParams {
    double min_range = 0.30;          // scan points closer than this are gripper artifacts
    double merge_voxel = 0.01;        // leaf size for scan fusion, meters
    Box3D workspace;                  // crop box in the base frame
    double z_band_min = 0.3;          // camera-frame depth band
    double z_band_max = 2.0;
    double plane_voxel = 0.002;       // pre-RANSAC downsample leaf
    double plane_dist_thresh = 0.0085;
    int plane_iterations = 2000;
    double plane_inlier_remove = 0.005;
    double normal_radius = 0.005;
    int normal_knn = 5;
    double cluster_normal_scale = 0.1; // alpha in [x,y,z,a*n]
    int min_cluster_size = 15;
    double cluster_eps = 0.02;         // feature-space linkage distance

    void validate() const;
};

/// Pinhole back-projection of a metric depth image. Zero/NaN depths emit no
/// point. Throws InputError when the image does not match the intrinsics.
PointCloud reproject_depth(const DepthImage& depth, const CameraIntrinsics& intr);

/// Applies p' = R p + t after filtering on the *pre-transform* camera-frame Z.
PointCloud transform_and_band_filter(const PointCloud& cloud, const RigidTransform& transform,
                                     double z_min, double z_max);

/// One representative (occupant centroid) per occupied leaf-sized cube.
/// Output order follows first occupancy of each voxel.
PointCloud voxel_downsample(const PointCloud& cloud, double leaf);

/// Scan fusion: per view, drop points with ||p|| < min_range (camera frame),
/// transform to base, crop to the workspace box; union all views and voxel
/// downsample. An empty result is valid (flagged by the caller, not fatal).
PointCloud merge_scan(const std::vector<std::pair<PointCloud, RigidTransform>>& views,
                      const GeomParams& params);

/// Seeded RANSAC plane fit on the 2 mm-downsampled cloud; returns the
/// canonicalized plane and the residual cloud (points with |signed distance|
/// <= plane_inlier_remove removed). Throws InputError when no valid
/// hypothesis exists (fewer than 3 points or all collinear).
std::pair<PlaneCoeffs, PointCloud> fit_plane_ransac(const PointCloud& cloud,
                                                    const GeomParams& params,
                                                    std::uint64_t seed);

/// Per-point normal = smallest-eigenvector of the neighborhood covariance
/// (radius-limited, capped at k nearest). Unit length, sign canonicalized
/// toward camera +Z. Isolated points fall back to (0,0,1).
std::vector<Eigen::Vector3d> estimate_normals(const PointCloud& cloud, double radius, int k_nn);

/// Density clustering in the 6D feature space [x, y, z, a*nx, a*ny, a*nz]:
/// single-linkage connectivity at cluster_eps, components below
/// min_cluster_size dropped as noise. Centroids use 3D positions only.
/// Clusters are sorted by centroid (lexicographic) so the result is invariant
/// under permutations of the input points.
std::vector<Cluster> cluster_objects(const PointCloud& cloud,
                                     const std::vector<Eigen::Vector3d>& normals,
                                     const GeomParams& params);

/// u = fx X / Z + cx, v = fy Y / Z + cy. Throws InputError when Z <= 0.
Eigen::Vector2d project_centroid(const Eigen::Vector3d& p, const CameraIntrinsics& intr);

} // namespace guider::geom
