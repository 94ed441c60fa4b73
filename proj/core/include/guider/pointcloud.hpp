#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "guider/errors.hpp"

namespace guider::geom {

struct CameraIntrinsics {
    double fx = 600.0; // pixels
    double fy = 600.0;
    double cx = 320.0;
    double cy = 240.0;
    int width = 640;
    int height = 480;

    void validate() const {
        if (!(fx > 0.0) || !(fy > 0.0))
            throw ConfigError("intrinsics: focal lengths must be > 0");
        if (width < 1 || height < 1)
            throw ConfigError("intrinsics: image dimensions must be >= 1");
        if (cx < 0.0 || cx > width || cy < 0.0 || cy > height)
            throw ConfigError("intrinsics: principal point outside image");
    }
};

struct PointCloud {
    std::vector<Eigen::Vector3d> points;
    std::string frame;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    static RigidTransform identity() { return {}; }

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
        return rotation * p + translation;
    }

    void validate() const {
        const Eigen::Matrix3d err = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
        if (err.cwiseAbs().maxCoeff() > 1e-9)
            throw InputError("RigidTransform: rotation not orthonormal");
        if (std::abs(rotation.determinant() - 1.0) > 1e-9)
            throw InputError("RigidTransform: rotation determinant != +1");
    }
};

/// Axis-aligned box, used for the workspace crop (base frame).
struct Box3D {
    Eigen::Vector3d min{-1.0, -1.0, 0.0};
    Eigen::Vector3d max{1.0, 1.0, 1.5};

    bool contains(const Eigen::Vector3d& p) const {
        return p.x() >= min.x() && p.x() <= max.x() &&
               p.y() >= min.y() && p.y() <= max.y() &&
               p.z() >= min.z() && p.z() <= max.z();
    }
};

/// ax + by + cz + d = 0 with unit (a,b,c).
struct PlaneCoeffs {
    double a = 0.0, b = 0.0, c = 1.0, d = 0.0;

    double signed_distance(const Eigen::Vector3d& p) const {
        return a * p.x() + b * p.y() + c * p.z() + d;
    }
};

struct Cluster {
    std::vector<int> indices;  // into the input cloud, ascending
    Eigen::Vector3d centroid;  // arithmetic mean of member positions
};

} // namespace guider::geom
