#include <doctest.h>

#include <cmath>
#include <limits>

#include "guider/cascade.hpp"
#include "guider/rng.hpp"

using namespace guider;
using namespace guider::cascade;

namespace {

geom::CameraIntrinsics small_intr(int w, int h) {
    geom::CameraIntrinsics intr;
    intr.width = w;
    intr.height = h;
    intr.cx = w / 2.0;
    intr.cy = h / 2.0;
    intr.fx = intr.fy = 600.0;
    return intr;
}

} // namespace

TEST_CASE("centre bias weights") {
    CascadeParams params;
    auto intr = small_intr(600, 520);
    intr.cx = 300.0;
    intr.cy = 260.0;

    ProbabilityImage p(600, 520, 1.0);
    CascadeState state(p);
    state.centre_bias(intr, params);

    CHECK(state.probs().at(300, 260) == doctest::Approx(1.0).epsilon(1e-12));
    // One sigma_c (240 px) to the left.
    CHECK(state.probs().at(60, 260) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

    // All-zero input stays zero.
    CascadeState zero(ProbabilityImage(600, 520, 0.0));
    zero.centre_bias(intr, params);
    for (const double v : zero.probs().data) CHECK(v == 0.0);
}

TEST_CASE("mask multiplication with clipping") {
    CascadeParams params;
    ProbabilityImage p(3, 1, 0.5);
    p.at(2, 0) = 0.9;
    BinaryMask mask(3, 1, 0);
    mask.at(0, 0) = 1;
    mask.at(2, 0) = 1;

    CascadeState state(p);
    state.apply_mask(mask, params);
    CHECK(state.probs().at(0, 0) == doctest::Approx(0.6));  // inside: x1.2
    CHECK(state.probs().at(1, 0) == doctest::Approx(0.2));  // outside: x0.4
    CHECK(state.probs().at(2, 0) == doctest::Approx(1.0));  // clipped at 1
}

TEST_CASE("depth weighting only above the threshold") {
    CascadeParams params;
    ProbabilityImage p(3, 1, 0.8);
    p.at(2, 0) = 0.2;
    DepthImage z(3, 1, 1.0f);
    z.at(1, 0) = 1.5f;

    CascadeState state(p);
    state.depth_weight(z, params);
    CHECK(state.probs().at(0, 0) == doctest::Approx(0.8).epsilon(1e-12)); // z = z0
    CHECK(state.probs().at(1, 0) ==
          doctest::Approx(0.8 * std::exp(-0.375)).epsilon(1e-12));
    CHECK(state.probs().at(2, 0) == doctest::Approx(0.2)); // below 0.3: untouched

    // Invalid depth leaves the pixel unchanged.
    ProbabilityImage q(1, 1, 0.9);
    DepthImage bad(1, 1, std::numeric_limits<float>::quiet_NaN());
    CascadeState s2(q);
    s2.depth_weight(bad, params);
    CHECK(s2.probs().at(0, 0) == doctest::Approx(0.9));
}

TEST_CASE("flooring raises evident pixels only") {
    CascadeParams params;
    ProbabilityImage p(3, 1, 0.0);
    p.at(0, 0) = 0.004;
    p.at(1, 0) = 0.5;

    CascadeState state(p);
    state.floor_probs(params);
    CHECK(state.probs().at(0, 0) == doctest::Approx(0.01));
    CHECK(state.probs().at(1, 0) == doctest::Approx(0.5));
    CHECK(state.probs().at(2, 0) == 0.0); // never-evident stays invisible
}

TEST_CASE("flooring never resurrects pixels zeroed before any stage") {
    CascadeParams params;
    const auto intr = small_intr(32, 32);
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        ProbabilityImage p(32, 32, 0.0);
        for (auto& v : p.data) v = rng.uniform() < 0.4 ? rng.uniform() : 0.0;
        const auto zero_at_start = p.data;

        CascadeState state(p);
        state.centre_bias(intr, params);
        BinaryMask mask(32, 32, 0);
        for (auto& v : mask.data) v = rng.uniform() < 0.5;
        state.apply_mask(mask, params);
        DepthImage z(32, 32, 1.0f);
        state.depth_weight(z, params);
        state.floor_probs(params);

        for (std::size_t i = 0; i < state.probs().data.size(); ++i) {
            if (zero_at_start[i] == 0.0) REQUIRE(state.probs().data[i] == 0.0);
            else REQUIRE(state.probs().data[i] >= params.floor_eps);
        }
    }
}

TEST_CASE("cascade stages keep values in [0,1] and are deterministic") {
    CascadeParams params;
    const auto intr = small_intr(48, 48);
    Rng rng(5);
    ProbabilityImage p(48, 48, 0.0);
    for (auto& v : p.data) v = rng.uniform() < 0.3 ? 0.9 : 0.0;
    BinaryMask mask(48, 48, 0);
    for (auto& v : mask.data) v = rng.uniform() < 0.5;
    DepthImage z(48, 48, 1.2f);

    auto run = [&]() {
        CascadeState state(p);
        state.centre_bias(intr, params);
        state.apply_mask(mask, params);
        state.depth_weight(z, params);
        state.floor_probs(params);
        return state.probs().data;
    };
    const auto a = run();
    const auto b = run();
    CHECK(a == b);
    for (const double v : a) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("all-ones mask never decreases any pixel") {
    CascadeParams params;
    Rng rng(9);
    ProbabilityImage p(24, 24, 0.0);
    for (auto& v : p.data) v = rng.uniform() * 0.8;
    BinaryMask real(24, 24, 0);
    for (auto& v : real.data) v = rng.uniform() < 0.5;
    BinaryMask ones(24, 24, 1);

    CascadeState with_real(p);
    with_real.apply_mask(real, params);
    CascadeState with_ones(p);
    with_ones.apply_mask(ones, params);
    for (std::size_t i = 0; i < p.data.size(); ++i)
        CHECK(with_ones.probs().data[i] >= with_real.probs().data[i]);
}

TEST_CASE("pooling: single uniform component rescales to the band top") {
    CascadeParams params;
    const auto intr = small_intr(32, 32);
    ProbabilityImage p(32, 32, 0.0);
    for (int y = 5; y < 10; y++)
        for (int x = 5; x < 10; x++) p.at(x, y) = 0.4;
    DepthImage z(32, 32, 1.0f);

    const auto proposals = pool_objects(p, z, intr, params);
    REQUIRE(proposals.size() == 1);
    CHECK(proposals[0].score == doctest::Approx(0.7));
    CHECK(proposals[0].raw_score == doctest::Approx(0.4));
    CHECK(proposals[0].pixel_count == 25);
}

TEST_CASE("pooling: three components rescale by rank") {
    CascadeParams params;
    const auto intr = small_intr(64, 32);
    ProbabilityImage p(64, 32, 0.0);
    auto blob = [&](int x0, double value) {
        for (int y = 4; y < 9; ++y)
            for (int x = x0; x < x0 + 5; ++x) p.at(x, y) = value;
    };
    blob(4, 0.2);
    blob(24, 0.3);
    blob(44, 0.4);
    DepthImage z(64, 32, 1.0f);

    const auto proposals = pool_objects(p, z, intr, params);
    REQUIRE(proposals.size() == 3);
    // Sorted by descending score: 0.7, 0.6, 0.5.
    CHECK(proposals[0].score == doctest::Approx(0.7));
    CHECK(proposals[0].raw_score == doctest::Approx(0.4));
    CHECK(proposals[1].score == doctest::Approx(0.6));
    CHECK(proposals[1].raw_score == doctest::Approx(0.3));
    CHECK(proposals[2].score == doctest::Approx(0.5));
    CHECK(proposals[2].raw_score == doctest::Approx(0.2));
    CHECK(proposals[0].id == 0);
    CHECK(proposals[2].id == 2);
}

TEST_CASE("pooling drops speckles and components without depth") {
    CascadeParams params;
    const auto intr = small_intr(32, 32);
    ProbabilityImage p(32, 32, 0.0);
    for (int x = 4; x < 9; ++x) p.at(x, 4) = 0.5; // 5 px < n_min
    for (int y = 10; y < 15; ++y)
        for (int x = 10; x < 15; ++x) p.at(x, y) = 0.5; // valid 25 px
    DepthImage z(32, 32, 0.0f); // invalid everywhere
    CHECK(pool_objects(p, z, intr, params).empty());

    DepthImage z2(32, 32, 1.0f);
    const auto proposals = pool_objects(p, z2, intr, params);
    REQUIRE(proposals.size() == 1);
    CHECK(proposals[0].pixel_count == 25);
}

TEST_CASE("component score equals a brute-force min scan") {
    CascadeParams params;
    const auto intr = small_intr(48, 48);
    Rng rng(42);
    ProbabilityImage p(48, 48, 0.0);
    for (int y = 10; y < 22; ++y)
        for (int x = 10; x < 22; ++x) p.at(x, y) = 0.3 + 0.5 * rng.uniform();
    DepthImage z(48, 48, 1.0f);

    const auto proposals = pool_objects(p, z, intr, params);
    REQUIRE(proposals.size() == 1);
    double expected = 1.0;
    for (const int idx : proposals[0].pixels) expected = std::min(expected, p.data[idx]);
    CHECK(proposals[0].raw_score == expected);
}

TEST_CASE("otsu pass drops low halos") {
    CascadeParams params;
    const auto intr = small_intr(40, 40);
    ProbabilityImage p(40, 40, 0.0);
    // Core at 0.8 surrounded by a dim halo at 0.05 that would otherwise merge
    // the component's min down.
    for (int y = 10; y < 22; ++y)
        for (int x = 10; x < 22; ++x) p.at(x, y) = 0.05;
    for (int y = 13; y < 19; ++y)
        for (int x = 13; x < 19; ++x) p.at(x, y) = 0.8;
    DepthImage z(40, 40, 1.0f);

    const auto proposals = pool_objects(p, z, intr, params);
    REQUIRE(proposals.size() == 1);
    CHECK(proposals[0].raw_score == doctest::Approx(0.8));
    CHECK(proposals[0].pixel_count == 36);
}

TEST_CASE("pooled centroid back-projects the median depth") {
    CascadeParams params;
    const auto intr = small_intr(64, 64);
    ProbabilityImage p(64, 64, 0.0);
    for (int y = 30; y < 35; ++y)
        for (int x = 40; x < 45; ++x) p.at(x, y) = 0.5;
    DepthImage z(64, 64, 0.0f);
    for (int y = 30; y < 35; ++y)
        for (int x = 40; x < 45; ++x) z.at(x, y) = 2.0f;

    const auto proposals = pool_objects(p, z, intr, params);
    REQUIRE(proposals.size() == 1);
    const auto c = proposals[0].centroid;
    CHECK(c.z() == doctest::Approx(2.0));
    CHECK(c.x() == doctest::Approx((42.0 - intr.cx) / intr.fx * 2.0));
    CHECK(c.y() == doctest::Approx((32.0 - intr.cy) / intr.fy * 2.0));
}
