#include <doctest.h>

#include <Eigen/Geometry>
#include <set>

#include "guider/rng.hpp"
#include "guider/scene_geometry.hpp"

using namespace guider;
using namespace guider::geom;

namespace {

CameraIntrinsics test_intr() {
    CameraIntrinsics intr;
    intr.fx = intr.fy = 600.0;
    intr.cx = 320.0;
    intr.cy = 240.0;
    intr.width = 640;
    intr.height = 480;
    return intr;
}

RigidTransform rotation_about(const Eigen::Vector3d& axis, double angle,
                              const Eigen::Vector3d& t = Eigen::Vector3d::Zero()) {
    RigidTransform out;
    out.rotation = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
    out.translation = t;
    return out;
}

} // namespace

TEST_CASE("depth reprojection pinhole examples") {
    const auto intr = test_intr();
    DepthImage depth(intr.width, intr.height, 0.0f);
    depth.at(320, 240) = 1.0f; // principal point
    depth.at(500, 240) = 2.0f;
    depth.at(100, 100) = 0.0f; // invalid depth: no point emitted

    const auto cloud = reproject_depth(depth, intr);
    REQUIRE(cloud.size() == 2);
    CHECK(cloud.points[0].isApprox(Eigen::Vector3d(0, 0, 1), 1e-12));
    // u = 500: X = (500-320)/600*2 = 0.6
    CHECK(cloud.points[1].isApprox(Eigen::Vector3d(0.6, 0, 2), 1e-12));
}

TEST_CASE("unit tangent pixel") {
    CameraIntrinsics intr = test_intr();
    intr.cx = 10.0;
    intr.cy = 20.0;
    intr.fx = 30.0;
    intr.fy = 30.0;
    intr.width = 64;
    intr.height = 48;
    DepthImage depth(64, 48, 0.0f);
    depth.at(40, 20) = 2.0f; // u = cx + fx
    const auto cloud = reproject_depth(depth, intr);
    REQUIRE(cloud.size() == 1);
    CHECK(cloud.points[0].isApprox(Eigen::Vector3d(2.0, 0.0, 2.0), 1e-12));
}

TEST_CASE("reprojection dimension mismatch") {
    DepthImage depth(10, 10, 1.0f);
    CHECK_THROWS_AS(reproject_depth(depth, test_intr()), InputError);
}

TEST_CASE("reproject then project round-trips") {
    const auto intr = test_intr();
    DepthImage depth(intr.width, intr.height, 0.0f);
    Rng rng(11);
    std::vector<std::pair<int, int>> pixels;
    for (int i = 0; i < 200; ++i) {
        const int u = static_cast<int>(rng.uniform_int(0, intr.width - 1));
        const int v = static_cast<int>(rng.uniform_int(0, intr.height - 1));
        if (depth.at(u, v) > 0) continue;
        depth.at(u, v) = static_cast<float>(rng.uniform(0.3, 3.0));
        pixels.emplace_back(u, v);
    }
    const auto cloud = reproject_depth(depth, intr);
    std::size_t k = 0;
    for (int v = 0; v < depth.height; ++v) {
        for (int u = 0; u < depth.width; ++u) {
            if (!(depth.at(u, v) > 0)) continue;
            const auto uv = project_centroid(cloud.points[k++], intr);
            CHECK(uv.x() == doctest::Approx(u).epsilon(1e-6));
            CHECK(uv.y() == doctest::Approx(v).epsilon(1e-6));
        }
    }
}

TEST_CASE("transform and band filter") {
    PointCloud cloud;
    cloud.points = {{0.1, 0.2, 1.0}, {0.0, 0.0, 0.2}, {0.0, 0.0, 2.5}};

    SUBCASE("identity keeps in-band points") {
        const auto out = transform_and_band_filter(cloud, RigidTransform::identity(), 0.3, 2.0);
        REQUIRE(out.size() == 1);
        CHECK(out.points[0].isApprox(Eigen::Vector3d(0.1, 0.2, 1.0), 1e-12));
    }
    SUBCASE("filter uses the pre-transform z") {
        // A rotation that would move the out-of-band point into band must not
        // save it.
        const auto rot = rotation_about({1, 0, 0}, 1.0, {1.0, 0.0, 0.0});
        const auto out = transform_and_band_filter(cloud, rot, 0.3, 2.0);
        REQUIRE(out.size() == 1);
        CHECK(out.points[0].isApprox(rot.apply(cloud.points[0]), 1e-12));
    }
    SUBCASE("pure translation shifts") {
        RigidTransform shift;
        shift.translation = {1.0, 0.0, 0.0};
        const auto out = transform_and_band_filter(cloud, shift, 0.0, 10.0);
        CHECK(out.points[0].isApprox(Eigen::Vector3d(1.1, 0.2, 1.0), 1e-12));
    }
}

TEST_CASE("rigid transforms preserve pairwise distances") {
    Rng rng(3);
    PointCloud cloud;
    for (int i = 0; i < 50; ++i)
        cloud.points.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.5, 2));
    const auto rot = rotation_about({0.3, -0.5, 0.8}, 0.9, {0.2, -0.1, 0.4});
    const auto out = transform_and_band_filter(cloud, rot, -10, 10);
    REQUIRE(out.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        for (std::size_t j = i + 1; j < cloud.size(); ++j) {
            const double before = (cloud.points[i] - cloud.points[j]).norm();
            const double after = (out.points[i] - out.points[j]).norm();
            CHECK(std::abs(before - after) < 1e-9);
        }
}

TEST_CASE("invalid rotations rejected") {
    RigidTransform bad;
    bad.rotation(0, 0) = 2.0;
    CHECK_THROWS_AS(bad.validate(), InputError);
    RigidTransform mirror;
    mirror.rotation = Eigen::Vector3d(1, 1, -1).asDiagonal(); // det = -1
    CHECK_THROWS_AS(mirror.validate(), InputError);
}

TEST_CASE("voxel downsampling merges coincident points") {
    PointCloud cloud;
    cloud.points = {{0.001, 0.001, 0.001}, {0.002, 0.002, 0.002}, {0.5, 0.5, 0.5}};
    const auto out = voxel_downsample(cloud, 0.01);
    REQUIRE(out.size() == 2);
    CHECK(out.points[0].isApprox(Eigen::Vector3d(0.0015, 0.0015, 0.0015), 1e-12));

    // Never two representatives in one voxel; size never grows.
    Rng rng(17);
    PointCloud big;
    for (int i = 0; i < 500; ++i)
        big.points.emplace_back(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                                rng.uniform(0.0, 0.4));
    const auto sampled = voxel_downsample(big, 0.05);
    CHECK(sampled.size() <= big.size());
    std::set<std::tuple<long, long, long>> keys;
    for (const auto& p : sampled.points) {
        const auto key = std::make_tuple(std::lround(std::floor(p.x() / 0.05)),
                                         std::lround(std::floor(p.y() / 0.05)),
                                         std::lround(std::floor(p.z() / 0.05)));
        CHECK(keys.insert(key).second);
    }
}

TEST_CASE("merge_scan drops close range points and crops") {
    GeomParams params;
    PointCloud view;
    view.points = {{0.05, 0.05, 0.15}, // range 0.17 < 0.30: gripper artifact
                   {0.10, 0.10, 0.50},
                   {5.0, 5.0, 5.0}};   // outside workspace
    const auto merged = merge_scan({{view, RigidTransform::identity()}}, params);
    REQUIRE(merged.size() == 1);
    CHECK(merged.points[0].isApprox(Eigen::Vector3d(0.10, 0.10, 0.50), 1e-12));
    CHECK_THROWS_AS(merge_scan({}, params), InputError);
}

TEST_CASE("plane RANSAC on a known plane") {
    GeomParams params;
    PointCloud cloud;
    // 15x15 grid on z = 0, spaced clear of the 2 mm pre-downsample.
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j)
            cloud.points.emplace_back(i * 0.01, j * 0.01, 0.0);
    for (int k = 0; k < 10; ++k) cloud.points.emplace_back(0.01 * k, 0.005 + 0.01 * k, 0.1);

    const auto [plane, residual] = fit_plane_ransac(cloud, params, 1234);
    CHECK(std::abs(plane.a) < 1e-9);
    CHECK(std::abs(plane.b) < 1e-9);
    CHECK(plane.c == doctest::Approx(1.0));
    CHECK(std::abs(plane.d) < 1e-9);
    CHECK(residual.size() == 10);
    for (const auto& p : residual.points) CHECK(p.z() == doctest::Approx(0.1));

    // Same seed, same plane; inliers of the returned model respect the
    // threshold.
    const auto [plane2, residual2] = fit_plane_ransac(cloud, params, 1234);
    CHECK(plane.a == plane2.a);
    CHECK(plane.b == plane2.b);
    CHECK(plane.c == plane2.c);
    CHECK(plane.d == plane2.d);
    CHECK(residual2.size() == residual.size());
}

TEST_CASE("all-coplanar cloud leaves an empty residual") {
    GeomParams params;
    PointCloud cloud;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 5; ++j)
            cloud.points.emplace_back(i * 0.01, j * 0.01, 0.3 + 0.5 * (i * 0.01));
    const auto [plane, residual] = fit_plane_ransac(cloud, params, 7);
    CHECK(residual.empty());
}

TEST_CASE("degenerate clouds are rejected") {
    GeomParams params;
    PointCloud two;
    two.points = {{0, 0, 0}, {0.1, 0, 0}};
    CHECK_THROWS_AS(fit_plane_ransac(two, params, 1), InputError);

    PointCloud collinear;
    for (int i = 0; i < 30; ++i) collinear.points.emplace_back(i * 0.01, 0.0, 0.0);
    CHECK_THROWS_AS(fit_plane_ransac(collinear, params, 1), InputError);
}

TEST_CASE("normals on canonical planes") {
    PointCloud flat;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 4; ++j)
            flat.points.emplace_back(i * 0.002, j * 0.002, 0.0);
    const auto normals = estimate_normals(flat, 0.005, 5);
    for (const auto& n : normals) CHECK(n.isApprox(Eigen::Vector3d(0, 0, 1), 1e-9));

    // Vertical plane x = 0: normals (+-1, 0, 0); the sign rule picks +x.
    PointCloud wall;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 4; ++j)
            wall.points.emplace_back(0.0, i * 0.002, j * 0.002);
    const auto wall_normals = estimate_normals(wall, 0.005, 5);
    for (const auto& n : wall_normals) {
        CHECK(std::abs(n.x()) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(n.x() > 0.0);
    }
}

TEST_CASE("isolated point gets the fallback normal") {
    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {1, 1, 1}};
    const auto normals = estimate_normals(cloud, 0.005, 5);
    CHECK(normals[0].isApprox(Eigen::Vector3d(0, 0, 1), 1e-12));
    CHECK(normals[1].isApprox(Eigen::Vector3d(0, 0, 1), 1e-12));
}

TEST_CASE("clustering separates blobs and prunes small ones") {
    GeomParams params;
    PointCloud cloud;
    // Blob A: 30 points in a tight line; Blob B: 30 points far away.
    for (int i = 0; i < 30; ++i) cloud.points.emplace_back(0.002 * i, 0.0, 0.5);
    for (int i = 0; i < 30; ++i) cloud.points.emplace_back(1.0 + 0.002 * i, 0.0, 0.5);
    // Blob C: only 10 points (below min_cluster_size).
    for (int i = 0; i < 10; ++i) cloud.points.emplace_back(2.0 + 0.002 * i, 0.0, 0.5);

    std::vector<Eigen::Vector3d> normals(cloud.size(), Eigen::Vector3d(0, 0, 1));
    const auto clusters = cluster_objects(cloud, normals, params);
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].centroid.isApprox(Eigen::Vector3d(0.029, 0.0, 0.5), 1e-9));
    CHECK(clusters[1].centroid.isApprox(Eigen::Vector3d(1.029, 0.0, 0.5), 1e-9));

    // Brute-force connectivity oracle: same membership counts.
    CHECK(clusters[0].indices.size() == 30);
    CHECK(clusters[1].indices.size() == 30);
}

TEST_CASE("clustering is invariant under input permutation") {
    GeomParams params;
    PointCloud cloud;
    Rng rng(5);
    for (int b = 0; b < 3; ++b)
        for (int i = 0; i < 20; ++i)
            cloud.points.emplace_back(b * 0.8 + rng.uniform(0, 0.01), rng.uniform(0, 0.01), 1.0);

    std::vector<Eigen::Vector3d> normals(cloud.size(), Eigen::Vector3d(0, 0, 1));
    const auto base = cluster_objects(cloud, normals, params);

    // Shuffle.
    PointCloud shuffled = cloud;
    Rng shuffle_rng(6);
    for (std::size_t i = shuffled.points.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(shuffle_rng.uniform_int(0, i - 1));
        std::swap(shuffled.points[i - 1], shuffled.points[j]);
    }
    const auto perm = cluster_objects(shuffled, normals, params);
    REQUIRE(perm.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(perm[i].centroid.isApprox(base[i].centroid, 1e-9));
}

TEST_CASE("empty cloud clusters to nothing") {
    GeomParams params;
    CHECK(cluster_objects({}, {}, params).empty());
}

TEST_CASE("centroid projection examples") {
    CameraIntrinsics intr = test_intr();
    const auto uv = project_centroid({0, 0, 1}, intr);
    CHECK(uv.x() == doctest::Approx(320.0));
    CHECK(uv.y() == doctest::Approx(240.0));

    const auto uv2 = project_centroid({1, 0, 1}, intr);
    CHECK(uv2.x() == doctest::Approx(920.0));

    CHECK_THROWS_AS(project_centroid({0, 0, 0}, intr), InputError);
    CHECK_THROWS_AS(project_centroid({0, 0, -1}, intr), InputError);
}
