#include <doctest.h>

#include <cmath>

#include "guider/fusion.hpp"
#include "guider/rng.hpp"

using namespace guider;
using namespace guider::fusion;

TEST_CASE("normalize and threshold") {
    FusionParams params;

    SUBCASE("constant map stays all zero") {
        ProbabilityImage s(8, 8, 0.37);
        const auto mask = normalize_and_threshold(s, params);
        for (const auto v : mask.data) CHECK(v == 0);
    }
    SUBCASE("only the top value survives tau=0.9") {
        ProbabilityImage s(3, 1, 0.0);
        s.at(1, 0) = 0.5;
        s.at(2, 0) = 1.0;
        const auto mask = normalize_and_threshold(s, params);
        CHECK(mask.at(0, 0) == 0);
        CHECK(mask.at(1, 0) == 0);
        CHECK(mask.at(2, 0) == 1);
    }
    SUBCASE("min-max endpoints") {
        ProbabilityImage s(2, 1, 0.2);
        s.at(1, 0) = 0.8;
        const auto mask = normalize_and_threshold(s, params);
        CHECK(mask.at(0, 0) == 0);
        CHECK(mask.at(1, 0) == 1);
    }
    SUBCASE("invariant under positive affine rescaling away from the guard") {
        Rng rng(21);
        ProbabilityImage s(16, 16, 0.0);
        for (auto& v : s.data) v = rng.uniform();
        ProbabilityImage scaled = s;
        for (auto& v : scaled.data) v = 3.0 * v + 0.25;
        CHECK(normalize_and_threshold(s, params).data ==
              normalize_and_threshold(scaled, params).data);
    }
}

TEST_CASE("instance mask filtering and merge") {
    FusionParams params;
    const int w = 20, h = 10; // 200 px image

    auto make_mask = [&](int x0, int x1, double conf) {
        ScoredMask sm;
        sm.mask = BinaryMask(w, h, 0);
        for (int y = 0; y < h; ++y)
            for (int x = x0; x <= x1; ++x) sm.mask.at(x, y) = 1;
        sm.confidence = conf;
        return sm;
    };

    SUBCASE("oversized mask dropped") {
        // 6 columns x 10 rows = 60 px = 30% > 25%.
        const auto merged = filter_and_merge_masks({make_mask(0, 5, 0.9)}, w, h, params);
        for (const auto v : merged.data) CHECK(v == 0);
    }
    SUBCASE("low-confidence mask dropped, boundary kept") {
        const auto dropped = filter_and_merge_masks({make_mask(0, 2, 0.39)}, w, h, params);
        for (const auto v : dropped.data) CHECK(v == 0);
        const auto kept = filter_and_merge_masks({make_mask(0, 2, 0.40)}, w, h, params);
        CHECK(kept.at(1, 1) == 1);
    }
    SUBCASE("overlapping valid masks OR together") {
        const auto merged =
            filter_and_merge_masks({make_mask(0, 2, 0.9), make_mask(2, 4, 0.9)}, w, h, params);
        CHECK(merged.at(0, 0) == 1);
        CHECK(merged.at(2, 0) == 1);
        CHECK(merged.at(4, 0) == 1);
        CHECK(merged.at(5, 0) == 0);
    }
    SUBCASE("filtering is monotone: removing a mask never adds pixels") {
        const std::vector<ScoredMask> both = {make_mask(0, 2, 0.9), make_mask(4, 4, 0.9)};
        const std::vector<ScoredMask> fewer = {both[0]};
        const auto merged_both = filter_and_merge_masks(both, w, h, params);
        const auto merged_fewer = filter_and_merge_masks(fewer, w, h, params);
        for (std::size_t i = 0; i < merged_both.data.size(); ++i)
            CHECK(merged_fewer.data[i] <= merged_both.data[i]);
    }
}

TEST_CASE("agreement-weighted 2D fusion") {
    FusionParams params;
    BinaryMask a(2, 2, 0), b(2, 2, 0);
    a.at(0, 0) = 1;
    b.at(0, 0) = 1; // both
    a.at(1, 0) = 1; // only a
    b.at(0, 1) = 1; // only b
    DepthImage depth(2, 2, 1.5f);
    depth.at(1, 0) = 0.0f; // invalid depth at a salient pixel

    const auto fused = fuse_2d(a, b, depth, params);
    CHECK(fused.p.at(0, 0) == 0.9);
    CHECK(fused.p.at(1, 0) == 0.6);
    CHECK(fused.p.at(0, 1) == 0.6);
    CHECK(fused.p.at(1, 1) == 0.0);

    // Z-buffer defined exactly where salient and depth valid.
    CHECK(fused.zbuffer.at(0, 0) == 1.5f);
    CHECK(std::isnan(fused.zbuffer.at(1, 0))); // invalid depth: absent
    CHECK(std::isnan(fused.zbuffer.at(1, 1))); // not salient: absent

    // Symmetric in the two detectors.
    const auto swapped = fuse_2d(b, a, depth, params);
    CHECK(swapped.p.data == fused.p.data);

    // Output values limited to the declared set.
    for (const auto v : fused.p.data)
        CHECK((v == 0.0 || v == 0.6 || v == 0.9));
}

TEST_CASE("fusion dimension mismatches rejected") {
    FusionParams params;
    BinaryMask a(2, 2, 0), b(3, 2, 0);
    DepthImage depth(2, 2, 1.0f);
    CHECK_THROWS_AS(fuse_2d(a, b, depth, params), InputError);
}
