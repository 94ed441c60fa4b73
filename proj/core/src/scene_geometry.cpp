#include "guider/scene_geometry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <unordered_map>

#include "guider/rng.hpp"

namespace guider::geom {

namespace {

// Packs a quantized voxel coordinate into one key. 21 bits per axis signed.
std::uint64_t voxel_key(const Eigen::Vector3d& p, double leaf) {
    const auto q = [&](double v) {
        return static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(v / leaf)) + (1ll << 20)) & 0x1fffffull;
    };
    return (q(p.x()) << 42) | (q(p.y()) << 21) | q(p.z());
}

void canonicalize_plane(PlaneCoeffs& plane) {
    const double eps = 1e-12;
    bool flip = false;
    if (plane.c < -eps) flip = true;
    else if (std::abs(plane.c) <= eps) {
        if (plane.b < -eps) flip = true;
        else if (std::abs(plane.b) <= eps && plane.a < 0.0) flip = true;
    }
    if (flip) {
        plane.a = -plane.a;
        plane.b = -plane.b;
        plane.c = -plane.c;
        plane.d = -plane.d;
    }
}

void canonicalize_normal(Eigen::Vector3d& n) {
    const double eps = 1e-12;
    bool flip = false;
    if (n.z() < -eps) flip = true;
    else if (std::abs(n.z()) <= eps) {
        if (n.y() < -eps) flip = true;
        else if (std::abs(n.y()) <= eps && n.x() < 0.0) flip = true;
    }
    if (flip) n = -n;
}

} // namespace

void GeomParams::validate() const {
    if (!(min_range >= 0.0)) throw ConfigError("geom: min_range must be >= 0");
    if (!(merge_voxel > 0.0) || !(plane_voxel > 0.0))
        throw ConfigError("geom: voxel sizes must be > 0");
    if (!(z_band_min < z_band_max)) throw ConfigError("geom: depth band empty");
    if (!(plane_dist_thresh > 0.0) || !(plane_inlier_remove > 0.0))
        throw ConfigError("geom: plane thresholds must be > 0");
    if (plane_iterations < 1) throw ConfigError("geom: plane_iterations must be >= 1");
    if (!(normal_radius > 0.0) || normal_knn < 1)
        throw ConfigError("geom: normal search parameters invalid");
    if (min_cluster_size < 1) throw ConfigError("geom: min_cluster_size must be >= 1");
    if (!(cluster_eps > 0.0) || !(cluster_normal_scale >= 0.0))
        throw ConfigError("geom: clustering parameters invalid");
    if (!(workspace.min.x() < workspace.max.x() && workspace.min.y() < workspace.max.y() &&
          workspace.min.z() < workspace.max.z()))
        throw ConfigError("geom: workspace box empty");
}

PointCloud reproject_depth(const DepthImage& depth, const CameraIntrinsics& intr) {
    intr.validate();
    if (!depth.same_shape(intr.width, intr.height))
        throw InputError("reproject_depth: depth image does not match intrinsics");

    PointCloud cloud;
    cloud.frame = "camera";
    cloud.points.reserve(depth.size());
    for (int v = 0; v < depth.height; ++v) {
        for (int u = 0; u < depth.width; ++u) {
            const float z = depth.at(u, v);
            if (!(z > 0.0f) || !std::isfinite(z)) continue;
            const double zd = z;
            cloud.points.emplace_back((u - intr.cx) / intr.fx * zd,
                                      (v - intr.cy) / intr.fy * zd, zd);
        }
    }
    return cloud;
}

PointCloud transform_and_band_filter(const PointCloud& cloud, const RigidTransform& transform,
                                     double z_min, double z_max) {
    transform.validate();
    PointCloud out;
    out.frame = cloud.frame;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) {
        if (p.z() < z_min || p.z() > z_max) continue;
        out.points.push_back(transform.apply(p));
    }
    return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
    if (!(leaf > 0.0)) throw ConfigError("voxel_downsample: leaf must be > 0");
    PointCloud out;
    out.frame = cloud.frame;
    std::unordered_map<std::uint64_t, int> slot;
    std::vector<Eigen::Vector3d> sums;
    std::vector<int> counts;
    for (const auto& p : cloud.points) {
        const std::uint64_t key = voxel_key(p, leaf);
        const auto it = slot.find(key);
        if (it == slot.end()) {
            slot.emplace(key, static_cast<int>(sums.size()));
            sums.push_back(p);
            counts.push_back(1);
        } else {
            sums[it->second] += p;
            ++counts[it->second];
        }
    }
    out.points.reserve(sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i) out.points.push_back(sums[i] / counts[i]);
    return out;
}

PointCloud merge_scan(const std::vector<std::pair<PointCloud, RigidTransform>>& views,
                      const GeomParams& params) {
    if (views.empty()) throw InputError("merge_scan: needs at least one view");
    PointCloud merged;
    merged.frame = "base";
    for (const auto& [cloud, transform] : views) {
        transform.validate();
        for (const auto& p : cloud.points) {
            if (p.norm() < params.min_range) continue;
            const Eigen::Vector3d q = transform.apply(p);
            if (!params.workspace.contains(q)) continue;
            merged.points.push_back(q);
        }
    }
    return voxel_downsample(merged, params.merge_voxel);
}

std::pair<PlaneCoeffs, PointCloud> fit_plane_ransac(const PointCloud& cloud,
                                                    const GeomParams& params,
                                                    std::uint64_t seed) {
    const PointCloud work = voxel_downsample(cloud, params.plane_voxel);
    const auto& pts = work.points;
    const int n = static_cast<int>(pts.size());
    if (n < 3) throw InputError("fit_plane_ransac: fewer than 3 points");

    Rng rng(seed);
    long best_count = -1;
    PlaneCoeffs best;

    for (int iter = 0; iter < params.plane_iterations; ++iter) {
        int i = static_cast<int>(rng.uniform_int(0, n - 1));
        int j = static_cast<int>(rng.uniform_int(0, n - 1));
        int k = static_cast<int>(rng.uniform_int(0, n - 1));
        if (i == j || j == k || i == k) continue;
        const Eigen::Vector3d normal = (pts[j] - pts[i]).cross(pts[k] - pts[i]);
        const double norm = normal.norm();
        if (norm < 1e-12) continue; // collinear sample
        const Eigen::Vector3d un = normal / norm;
        PlaneCoeffs plane{un.x(), un.y(), un.z(), -un.dot(pts[i])};
        long count = 0;
        for (const auto& p : pts)
            if (std::abs(plane.signed_distance(p)) <= params.plane_dist_thresh) ++count;
        if (count > best_count) { // strict: earliest iteration wins ties
            best_count = count;
            best = plane;
        }
    }

    if (best_count < 0) throw InputError("fit_plane_ransac: degenerate cloud (no valid hypothesis)");
    canonicalize_plane(best);

    PointCloud residual;
    residual.frame = work.frame;
    for (const auto& p : pts)
        if (std::abs(best.signed_distance(p)) > params.plane_inlier_remove)
            residual.points.push_back(p);
    return {best, residual};
}

std::vector<Eigen::Vector3d> estimate_normals(const PointCloud& cloud, double radius, int k_nn) {
    if (cloud.empty()) throw InputError("estimate_normals: empty cloud");
    const int n = static_cast<int>(cloud.size());
    std::vector<Eigen::Vector3d> normals(n, Eigen::Vector3d(0, 0, 1));

    std::vector<std::pair<double, int>> nearby;
    for (int i = 0; i < n; ++i) {
        nearby.clear();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = (cloud.points[j] - cloud.points[i]).norm();
            if (d <= radius) nearby.emplace_back(d, j);
        }
        if (nearby.empty()) continue; // isolated: keep (0,0,1) fallback
        std::sort(nearby.begin(), nearby.end());
        if (static_cast<int>(nearby.size()) > k_nn) nearby.resize(k_nn);

        Eigen::Vector3d mean = cloud.points[i];
        for (const auto& [d, j] : nearby) mean += cloud.points[j];
        mean /= static_cast<double>(nearby.size() + 1);

        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        auto accumulate = [&](const Eigen::Vector3d& p) {
            const Eigen::Vector3d q = p - mean;
            cov += q * q.transpose();
        };
        accumulate(cloud.points[i]);
        for (const auto& [d, j] : nearby) accumulate(cloud.points[j]);

        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
        Eigen::Vector3d normal = solver.eigenvectors().col(0); // smallest eigenvalue
        const double norm = normal.norm();
        if (norm < 1e-12) continue;
        normal /= norm;
        canonicalize_normal(normal);
        normals[i] = normal;
    }
    return normals;
}

std::vector<Cluster> cluster_objects(const PointCloud& cloud,
                                     const std::vector<Eigen::Vector3d>& normals,
                                     const GeomParams& params) {
    const int n = static_cast<int>(cloud.size());
    if (n == 0) return {};
    if (normals.size() != cloud.size())
        throw InputError("cluster_objects: normals do not match cloud");

    using Feature = Eigen::Matrix<double, 6, 1>;
    std::vector<Feature> features(n);
    for (int i = 0; i < n; ++i) {
        features[i] << cloud.points[i], params.cluster_normal_scale * normals[i];
    }

    // Union-find over the eps-connectivity graph.
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    const double eps2 = params.cluster_eps * params.cluster_eps;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if ((features[i] - features[j]).squaredNorm() <= eps2) {
                const int ri = find(i);
                const int rj = find(j);
                if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
            }
        }
    }

    std::unordered_map<int, std::vector<int>> groups;
    for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);

    std::vector<Cluster> clusters;
    for (auto& [root, members] : groups) {
        if (static_cast<int>(members.size()) < params.min_cluster_size) continue;
        Cluster c;
        std::sort(members.begin(), members.end());
        c.indices = members;
        Eigen::Vector3d sum = Eigen::Vector3d::Zero();
        for (const int idx : members) sum += cloud.points[idx];
        c.centroid = sum / static_cast<double>(members.size());
        clusters.push_back(std::move(c));
    }
    std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
        if (a.centroid.x() != b.centroid.x()) return a.centroid.x() < b.centroid.x();
        if (a.centroid.y() != b.centroid.y()) return a.centroid.y() < b.centroid.y();
        return a.centroid.z() < b.centroid.z();
    });
    return clusters;
}

Eigen::Vector2d project_centroid(const Eigen::Vector3d& p, const CameraIntrinsics& intr) {
    if (!(p.z() > 0.0)) throw InputError("project_centroid: Z must be > 0");
    return {intr.fx * p.x() / p.z() + intr.cx, intr.fy * p.y() / p.z() + intr.cy};
}

} // namespace guider::geom
