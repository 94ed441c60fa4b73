#include "guider/cascade.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "guider/mask_ops.hpp"

namespace guider::cascade {

CascadeState::CascadeState(ProbabilityImage initial) : p_(std::move(initial)) {
    for (const double v : p_.data)
        if (v < 0.0 || v > 1.0) throw InputError("CascadeState: values must be in [0,1]");
    ever_.assign(p_.data.size(), 0);
    absorb_positive();
}

void CascadeState::absorb_positive() {
    for (std::size_t i = 0; i < p_.data.size(); ++i)
        if (p_.data[i] > 0.0) ever_[i] = 1;
}

void CascadeState::centre_bias(const geom::CameraIntrinsics& intr, const CascadeParams& params) {
    params.validate();
    if (!p_.same_shape(intr.width, intr.height))
        throw InputError("centre_bias: image does not match intrinsics");
    const double denom = 2.0 * params.sigma_c * params.sigma_c;
    for (int v = 0; v < p_.height; ++v) {
        for (int u = 0; u < p_.width; ++u) {
            const double du = u - intr.cx;
            const double dv = v - intr.cy;
            p_.at(u, v) *= std::exp(-(du * du + dv * dv) / denom);
        }
    }
    absorb_positive();
}

void CascadeState::apply_mask(const BinaryMask& mask, const CascadeParams& params) {
    require_same_shape(p_.width, p_.height, mask.width, mask.height, "apply_mask");
    for (std::size_t i = 0; i < p_.data.size(); ++i) {
        const double factor = mask.data[i] != 0 ? params.lambda_in : params.lambda_out;
        p_.data[i] = std::clamp(p_.data[i] * factor, 0.0, 1.0);
    }
    absorb_positive();
}

void CascadeState::depth_weight(const DepthImage& zbuffer, const CascadeParams& params) {
    require_same_shape(p_.width, p_.height, zbuffer.width, zbuffer.height, "depth_weight");
    for (std::size_t i = 0; i < p_.data.size(); ++i) {
        if (p_.data[i] <= params.depth_apply_threshold) continue;
        const float z = zbuffer.data[i];
        if (!(z > 0.0f) || !std::isfinite(z)) continue;
        const double dz = static_cast<double>(z) - params.z_nominal;
        p_.data[i] *= std::exp(-params.alpha_depth * dz * dz);
    }
    absorb_positive();
}

void CascadeState::floor_probs(const CascadeParams& params) {
    for (std::size_t i = 0; i < p_.data.size(); ++i)
        if (ever_[i]) p_.data[i] = std::max(p_.data[i], params.floor_eps);
}

namespace {

/// Otsu threshold over a component's values, 64 bins spanning [vmin, vmax].
/// Returns the smallest kept value; a (near-)uniform component keeps all.
double otsu_keep_threshold(const std::vector<double>& values) {
    const auto [vmin_it, vmax_it] = std::minmax_element(values.begin(), values.end());
    const double vmin = *vmin_it;
    const double vmax = *vmax_it;
    if (vmax - vmin < 1e-12) return vmin;

    constexpr int kBins = 64;
    std::array<long, kBins> hist{};
    const double scale = kBins / (vmax - vmin);
    for (const double v : values) {
        int bin = static_cast<int>((v - vmin) * scale);
        bin = std::clamp(bin, 0, kBins - 1);
        ++hist[bin];
    }

    const double total = static_cast<double>(values.size());
    double sum_all = 0.0;
    for (int b = 0; b < kBins; ++b) sum_all += b * static_cast<double>(hist[b]);

    double best_var = -1.0;
    int best_t = -1;
    double w0 = 0.0;
    double sum0 = 0.0;
    for (int t = 0; t < kBins - 1; ++t) {
        w0 += static_cast<double>(hist[t]);
        sum0 += t * static_cast<double>(hist[t]);
        const double w1 = total - w0;
        if (w0 <= 0.0 || w1 <= 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) { // strict: ties keep the lowest threshold
            best_var = var;
            best_t = t;
        }
    }
    if (best_t < 0) return vmin;
    // Keep bins strictly above best_t.
    return vmin + (best_t + 1) / scale;
}

} // namespace

std::vector<ObjectProposal> pool_objects(const ProbabilityImage& p_star,
                                         const DepthImage& zbuffer,
                                         const geom::CameraIntrinsics& intr,
                                         const CascadeParams& params) {
    params.validate();
    require_same_shape(p_star.width, p_star.height, zbuffer.width, zbuffer.height,
                       "pool_objects");

    BinaryMask fg(p_star.width, p_star.height, 0);
    for (std::size_t i = 0; i < p_star.data.size(); ++i)
        fg.data[i] = p_star.data[i] >= params.pool_threshold ? 1 : 0;

    std::vector<ObjectProposal> proposals;
    for (const auto& comp : maskops::connected_components(fg, 8)) {
        if (static_cast<int>(comp.size()) < params.min_component_px) continue;

        std::vector<double> values;
        values.reserve(comp.size());
        for (const int idx : comp) values.push_back(p_star.data[idx]);
        const double keep_above = otsu_keep_threshold(values);

        ObjectProposal prop;
        for (const int idx : comp)
            if (p_star.data[idx] >= keep_above) prop.pixels.push_back(idx);
        if (static_cast<int>(prop.pixels.size()) < params.min_component_px) continue;

        prop.raw_score = p_star.data[prop.pixels[0]];
        double sum_u = 0.0, sum_v = 0.0;
        std::vector<float> depths;
        for (const int idx : prop.pixels) {
            prop.raw_score = std::min(prop.raw_score, p_star.data[idx]);
            sum_u += idx % p_star.width;
            sum_v += idx / p_star.width;
            const float z = zbuffer.data[idx];
            if (z > 0.0f && std::isfinite(z)) depths.push_back(z);
        }
        if (depths.empty()) continue; // cannot be tracked in 3D
        std::sort(depths.begin(), depths.end());
        const std::size_t nd = depths.size();
        const double z_med = (nd % 2 == 1)
                                 ? depths[nd / 2]
                                 : 0.5 * (static_cast<double>(depths[nd / 2 - 1]) + depths[nd / 2]);
        const double mean_u = sum_u / static_cast<double>(prop.pixels.size());
        const double mean_v = sum_v / static_cast<double>(prop.pixels.size());
        prop.centroid = Eigen::Vector3d((mean_u - intr.cx) / intr.fx * z_med,
                                        (mean_v - intr.cy) / intr.fy * z_med, z_med);
        prop.pixel_count = static_cast<int>(prop.pixels.size());
        prop.score = prop.raw_score;
        proposals.push_back(std::move(prop));
    }

    // Rank-linear rescale of qualifying scores into [g_min, g_max].
    std::vector<int> qualifying;
    for (int i = 0; i < static_cast<int>(proposals.size()); ++i)
        if (proposals[i].raw_score > params.relevance_threshold) qualifying.push_back(i);
    std::sort(qualifying.begin(), qualifying.end(), [&](int a, int b) {
        const auto& pa = proposals[a];
        const auto& pb = proposals[b];
        if (pa.raw_score != pb.raw_score) return pa.raw_score < pb.raw_score;
        if (pa.pixel_count != pb.pixel_count) return pa.pixel_count < pb.pixel_count;
        return pa.pixels[0] > pb.pixels[0];
    });
    const int k = static_cast<int>(qualifying.size());
    for (int rank = 0; rank < k; ++rank) {
        auto& prop = proposals[qualifying[rank]];
        prop.score = (k == 1) ? params.g_max
                              : params.g_min + (params.g_max - params.g_min) * rank / (k - 1);
    }

    std::sort(proposals.begin(), proposals.end(),
              [](const ObjectProposal& a, const ObjectProposal& b) {
                  if (a.score != b.score) return a.score > b.score;
                  if (a.pixel_count != b.pixel_count) return a.pixel_count > b.pixel_count;
                  return a.pixels[0] < b.pixels[0];
              });
    for (int i = 0; i < static_cast<int>(proposals.size()); ++i) proposals[i].id = i;
    return proposals;
}

} // namespace guider::cascade
