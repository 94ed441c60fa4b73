#pragma once

#include <vector>

#include "guider/image.hpp"

namespace guider::fusion {

struct FusionParams {
    double saliency_threshold = 0.9; // tau on the stretched saliency map
    double stretch_epsilon = 1e-8;
    double max_area_frac = 0.25;     // instance masks above this fraction are dropped
    double min_confidence = 0.4;     // tau_conf
    double weight_single = 0.6;      // exactly one detector active
    double weight_both = 0.9;        // both detectors agree

    void validate() const {
        if (!(saliency_threshold > 0.0 && saliency_threshold < 1.0))
            throw ConfigError("fusion: saliency_threshold must be in (0,1)");
        if (!(stretch_epsilon > 0.0)) throw ConfigError("fusion: stretch_epsilon must be > 0");
        if (!(max_area_frac > 0.0 && max_area_frac <= 1.0))
            throw ConfigError("fusion: max_area_frac must be in (0,1]");
        if (!(min_confidence >= 0.0 && min_confidence <= 1.0))
            throw ConfigError("fusion: min_confidence must be in [0,1]");
        if (!(weight_single > 0.0 && weight_single < weight_both && weight_both <= 1.0))
            throw ConfigError("fusion: require 0 < weight_single < weight_both <= 1");
    }
};

struct ScoredMask {
    BinaryMask mask;
    double confidence = 1.0;
};

/// Agreement-weighted saliency field with its aligned depth buffer. p takes
/// only {0, weight_single, weight_both}; zbuffer holds the depth at salient
/// pixels and NaN where p = 0 or depth is invalid.
struct FusedSaliency {
    ProbabilityImage p;
    DepthImage zbuffer;
};

/// Min-max stretch with epsilon guard, then binary threshold (strictly
/// greater than tau). A constant map stretches to ~0 and yields an all-zero
/// mask.
BinaryMask normalize_and_threshold(const ProbabilityImage& saliency,
                                   const FusionParams& params);

/// Drops masks covering more than max_area_frac of the image or with
/// confidence below min_confidence, then ORs the survivors. All masks must
/// match (width, height).
BinaryMask filter_and_merge_masks(const std::vector<ScoredMask>& masks,
                                  int width, int height, const FusionParams& params);

/// 0 when neither mask is active, weight_single when exactly one is,
/// weight_both when both agree. Symmetric in the two masks.
FusedSaliency fuse_2d(const BinaryMask& detector_a, const BinaryMask& detector_b,
                      const DepthImage& depth, const FusionParams& params);

} // namespace guider::fusion
