#include "guider/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace guider::fusion {

BinaryMask normalize_and_threshold(const ProbabilityImage& saliency,
                                   const FusionParams& params) {
    if (saliency.empty()) throw InputError("normalize_and_threshold: empty map");
    const auto [min_it, max_it] = std::minmax_element(saliency.data.begin(), saliency.data.end());
    const double lo = *min_it;
    const double span = *max_it - lo + params.stretch_epsilon;

    BinaryMask mask(saliency.width, saliency.height, 0);
    for (std::size_t i = 0; i < saliency.data.size(); ++i) {
        const double stretched = (saliency.data[i] - lo) / span;
        mask.data[i] = stretched > params.saliency_threshold ? 1 : 0;
    }
    return mask;
}

BinaryMask filter_and_merge_masks(const std::vector<ScoredMask>& masks,
                                  int width, int height, const FusionParams& params) {
    BinaryMask merged(width, height, 0);
    const double max_area = params.max_area_frac * static_cast<double>(width) * height;
    for (const auto& scored : masks) {
        if (!scored.mask.same_shape(width, height))
            throw InputError("filter_and_merge_masks: mask dimension mismatch");
        if (scored.confidence < params.min_confidence) continue;
        long area = 0;
        for (const auto v : scored.mask.data) area += (v != 0);
        if (static_cast<double>(area) > max_area) continue;
        for (std::size_t i = 0; i < merged.data.size(); ++i)
            merged.data[i] |= (scored.mask.data[i] != 0);
    }
    return merged;
}

FusedSaliency fuse_2d(const BinaryMask& detector_a, const BinaryMask& detector_b,
                      const DepthImage& depth, const FusionParams& params) {
    require_same_shape(detector_a.width, detector_a.height, detector_b.width,
                       detector_b.height, "fuse_2d masks");
    require_same_shape(detector_a.width, detector_a.height, depth.width, depth.height,
                       "fuse_2d depth");

    FusedSaliency out;
    out.p = ProbabilityImage(detector_a.width, detector_a.height, 0.0);
    out.zbuffer = DepthImage(detector_a.width, detector_a.height,
                             std::numeric_limits<float>::quiet_NaN());
    for (std::size_t i = 0; i < out.p.data.size(); ++i) {
        const int active = (detector_a.data[i] != 0) + (detector_b.data[i] != 0);
        if (active == 0) continue;
        out.p.data[i] = (active == 2) ? params.weight_both : params.weight_single;
        const float z = depth.data[i];
        if (z > 0.0f && std::isfinite(z)) out.zbuffer.data[i] = z;
    }
    return out;
}

} // namespace guider::fusion
