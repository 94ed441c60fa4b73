#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "guider/image.hpp"
#include "guider/pointcloud.hpp"

namespace guider::cascade {

struct CascadeParams {
    double sigma_c = 240.0;       // centre-bias Gaussian, pixels
    double lambda_in = 1.2;       // inside-mask multiplier
    double lambda_out = 0.4;      // outside-mask multiplier
    double alpha_depth = 1.5;     // depth-weight exponent coefficient
    double z_nominal = 1.0;       // nominal working distance, meters
    double depth_apply_threshold = 0.3; // depth weighting only where P exceeds this
    double floor_eps = 0.01;
    double pool_threshold = 0.01; // tau_l foreground cut
    int min_component_px = 10;    // n_min
    double g_min = 0.5;           // rescale band
    double g_max = 0.7;
    double relevance_threshold = 0.05; // tau_rs

    void validate() const {
        if (!(sigma_c > 0.0)) throw ConfigError("cascade: sigma_c must be > 0");
        if (!(lambda_out < 1.0 && 1.0 < lambda_in))
            throw ConfigError("cascade: require lambda_out < 1 < lambda_in");
        if (!(alpha_depth > 0.0) || !(z_nominal > 0.0))
            throw ConfigError("cascade: depth weighting parameters must be > 0");
        if (!(g_min > 0.0 && g_min < g_max && g_max <= 1.0))
            throw ConfigError("cascade: require 0 < g_min < g_max <= 1");
        if (!(floor_eps > 0.0) || !(pool_threshold > 0.0))
            throw ConfigError("cascade: floor/pool thresholds must be > 0");
        if (min_component_px < 1) throw ConfigError("cascade: min_component_px must be >= 1");
        if (!(relevance_threshold >= 0.0))
            throw ConfigError("cascade: relevance_threshold must be >= 0");
    }
};

/// The pixel-probability cascade. Stage order is fixed (centre bias, mask
/// multiplication in the order bbox/morph/adv_obj/adv_rect, depth weighting,
/// flooring); the state tracks an ever-positive bitmap so flooring never
/// resurrects pixels that carried no evidence at any stage.
class CascadeState {
public:
    explicit CascadeState(ProbabilityImage initial);

    void centre_bias(const geom::CameraIntrinsics& intr, const CascadeParams& params);
    void apply_mask(const BinaryMask& mask, const CascadeParams& params);
    void depth_weight(const DepthImage& zbuffer, const CascadeParams& params);
    void floor_probs(const CascadeParams& params);

    const ProbabilityImage& probs() const { return p_; }
    const std::vector<std::uint8_t>& ever_positive() const { return ever_; }

private:
    void absorb_positive();

    ProbabilityImage p_;
    std::vector<std::uint8_t> ever_;
};

struct ObjectProposal {
    int id = 0;                     // rank order: 0 = highest score
    std::vector<int> pixels;        // row-major indices, ascending
    Eigen::Vector3d centroid{0, 0, 0}; // camera frame, from median z-buffer depth
    double score = 0.0;             // g_i after band rescaling
    double raw_score = 0.0;         // component min of P* before rescaling
    int pixel_count = 0;
};

/// Connected-object pooling: foreground P* >= pool_threshold, 8-connected
/// components, n_min size cut, per-component Otsu halo removal (64 bins),
/// score = min P* over surviving pixels, then rank-linear rescale of scores
/// above relevance_threshold into [g_min, g_max] (a single qualifying
/// component maps to g_max). Components without any valid z-buffer depth are
/// dropped. Output is sorted by descending score.
std::vector<ObjectProposal> pool_objects(const ProbabilityImage& p_star,
                                         const DepthImage& zbuffer,
                                         const geom::CameraIntrinsics& intr,
                                         const CascadeParams& params);

} // namespace guider::cascade
