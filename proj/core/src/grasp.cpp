#include "guider/grasp.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace guider::grasp {

namespace {

using maskops::convex_hull;
using maskops::set_pixel_centers;

double round2(double v) { return std::round(v * 100.0) / 100.0; }

bool mask_at(const BinaryMask& mask, long x, long y) {
    return x >= 0 && x < mask.width && y >= 0 && y < mask.height &&
           mask.at(static_cast<int>(x), static_cast<int>(y)) != 0;
}

bool sample_in_mask(const BinaryMask& mask, double x, double y) {
    return mask_at(mask, std::llround(x), std::llround(y));
}

/// In-mask traversal length from `m` along +-n in 0.5 px steps; stops at the
/// first out-of-mask (or off-image) sample in each direction.
double normal_span(const BinaryMask& mask, const Point2& m, const Point2& n,
                   double* t_plus_out, double* t_minus_out) {
    if (!sample_in_mask(mask, m.x, m.y)) {
        *t_plus_out = *t_minus_out = 0.0;
        return 0.0;
    }
    const double limit = std::hypot(mask.width, mask.height) + 1.0;
    auto walk = [&](double sx, double sy) {
        double t = 0.0;
        while (t < limit) {
            const double cand = t + 0.5;
            if (!sample_in_mask(mask, m.x + sx * cand, m.y + sy * cand)) break;
            t = cand;
        }
        return t;
    };
    *t_plus_out = walk(n.x, n.y);
    *t_minus_out = walk(-n.x, -n.y);
    return *t_plus_out + *t_minus_out;
}

struct Coverage {
    long total = 0;
    long covered = 0;
    double fraction() const { return total > 0 ? static_cast<double>(covered) / total : 0.0; }
};

/// Lattice coverage of an oriented rectangle. Off-image lattice cells count
/// in the denominator (free space), never as covered.
Coverage rect_coverage(const OrientedRect& rect, const BinaryMask& mask) {
    const double px = std::abs(rect.ax) * rect.half_len + std::abs(rect.ay) * rect.half_wid;
    const double py = std::abs(rect.ay) * rect.half_len + std::abs(rect.ax) * rect.half_wid;
    const long x0 = std::llround(std::floor(rect.cx - px));
    const long x1 = std::llround(std::ceil(rect.cx + px));
    const long y0 = std::llround(std::floor(rect.cy - py));
    const long y1 = std::llround(std::ceil(rect.cy + py));

    Coverage cov;
    for (long y = y0; y <= y1; ++y) {
        for (long x = x0; x <= x1; ++x) {
            if (!rect.contains(static_cast<double>(x), static_cast<double>(y))) continue;
            ++cov.total;
            if (mask_at(mask, x, y)) ++cov.covered;
        }
    }
    return cov;
}

void fill_rect(const OrientedRect& rect, BinaryMask& out) {
    const double px = std::abs(rect.ax) * rect.half_len + std::abs(rect.ay) * rect.half_wid;
    const double py = std::abs(rect.ay) * rect.half_len + std::abs(rect.ax) * rect.half_wid;
    const long x0 = std::llround(std::floor(rect.cx - px));
    const long x1 = std::llround(std::ceil(rect.cx + px));
    const long y0 = std::llround(std::floor(rect.cy - py));
    const long y1 = std::llround(std::ceil(rect.cy + py));
    for (long y = std::max(0l, y0); y <= std::min<long>(out.height - 1, y1); ++y)
        for (long x = std::max(0l, x0); x <= std::min<long>(out.width - 1, x1); ++x)
            if (rect.contains(static_cast<double>(x), static_cast<double>(y)))
                out.at(static_cast<int>(x), static_cast<int>(y)) = 1;
}

} // namespace

ObjectMask2D make_object_mask(BinaryMask mask, const DepthImage& depth, double fx) {
    require_same_shape(mask.width, mask.height, depth.width, depth.height, "make_object_mask");
    if (!(fx > 0.0)) throw InputError("make_object_mask: fx must be > 0");

    std::vector<float> depths;
    for (std::size_t i = 0; i < mask.data.size(); ++i) {
        if (mask.data[i] == 0) continue;
        const float z = depth.data[i];
        if (z > 0.0f && std::isfinite(z)) depths.push_back(z);
    }
    if (depths.empty()) throw InputError("make_object_mask: no valid depth under mask");
    std::sort(depths.begin(), depths.end());
    const std::size_t n = depths.size();
    const double median = (n % 2 == 1)
                              ? depths[n / 2]
                              : 0.5 * (static_cast<double>(depths[n / 2 - 1]) + depths[n / 2]);

    ObjectMask2D obj;
    obj.mask = std::move(mask);
    obj.z_obj = median;
    obj.gamma = median / fx;
    obj.validate();
    return obj;
}

RectSize min_area_rect(const std::vector<Point2>& pixel_centers) {
    if (pixel_centers.empty()) throw InputError("min_area_rect: no points");
    const auto hull = maskops::convex_hull(pixel_centers);
    if (hull.size() == 1) return {1.0, 1.0};
    if (hull.size() == 2) {
        const double len = std::hypot(hull[1].x - hull[0].x, hull[1].y - hull[0].y);
        return {len + 1.0, 1.0};
    }

    double best_area = -1.0;
    double best_a = 0.0, best_b = 0.0;
    const int n = static_cast<int>(hull.size());
    for (int i = 0; i < n; ++i) {
        const Point2& p = hull[i];
        const Point2& q = hull[(i + 1) % n];
        const double len = std::hypot(q.x - p.x, q.y - p.y);
        if (len < 1e-12) continue;
        const double ux = (q.x - p.x) / len;
        const double uy = (q.y - p.y) / len;
        double lo_a = 0.0, hi_a = 0.0, lo_b = 0.0, hi_b = 0.0;
        bool first = true;
        for (const auto& v : hull) {
            const double along = (v.x - p.x) * ux + (v.y - p.y) * uy;
            const double across = -(v.x - p.x) * uy + (v.y - p.y) * ux;
            if (first) {
                lo_a = hi_a = along;
                lo_b = hi_b = across;
                first = false;
            } else {
                lo_a = std::min(lo_a, along);
                hi_a = std::max(hi_a, along);
                lo_b = std::min(lo_b, across);
                hi_b = std::max(hi_b, across);
            }
        }
        const double ea = hi_a - lo_a;
        const double eb = hi_b - lo_b;
        const double area = ea * eb;
        if (best_area < 0.0 || area < best_area) {
            best_area = area;
            best_a = ea;
            best_b = eb;
        }
    }
    return {best_a + 1.0, best_b + 1.0};
}

bool bbox_feasible(const ObjectMask2D& obj, const GripperSpec& grip) {
    obj.validate();
    grip.validate();
    const RectSize rect = min_area_rect(set_pixel_centers(obj.mask));
    return rect.min_side() * obj.gamma <= 2.0 * grip.half_aperture;
}

int disk_radius_px(const ObjectMask2D& obj, const GripperSpec& grip) {
    return std::max(1, static_cast<int>(std::llround(grip.half_aperture / obj.gamma)));
}

bool morph_feasible(const ObjectMask2D& obj, const GripperSpec& grip) {
    obj.validate();
    grip.validate();
    const BinaryMask eroded = maskops::erode_disk(obj.mask, disk_radius_px(obj, grip));
    return maskops::count_set(eroded) == 0;
}

std::vector<Point2> candidate_points(const BinaryMask& mask, const GripperSpec& grip,
                                     double gamma) {
    if (maskops::count_set(mask) == 0) return {};

    std::vector<Point2> raw;
    const auto full_hull = convex_hull(set_pixel_centers(mask));
    raw.insert(raw.end(), full_hull.begin(), full_hull.end());

    // Leftover components after circular erosion contribute their own hulls.
    const int radius = std::max(1, static_cast<int>(std::llround(grip.half_aperture / gamma)));
    const BinaryMask eroded = maskops::erode_disk(mask, radius);
    for (const auto& comp : maskops::connected_components(eroded, 8)) {
        std::vector<Point2> pts;
        pts.reserve(comp.size());
        for (const int idx : comp)
            pts.push_back({static_cast<double>(idx % mask.width),
                           static_cast<double>(idx / mask.width)});
        const auto hull = convex_hull(std::move(pts));
        raw.insert(raw.end(), hull.begin(), hull.end());
    }

    // Opposite corners: march from the centroid away from each full-mask hull
    // vertex; record the first contour pixel strictly past the centroid.
    const auto centroid = maskops::mask_centroid(mask);
    const BinaryMask contour = maskops::contour_of(mask);
    const long centroid_px = std::llround(centroid.x);
    const long centroid_py = std::llround(centroid.y);
    const double limit = std::hypot(mask.width, mask.height) + 1.0;
    for (const auto& v : full_hull) {
        const double dx = centroid.x - v.x;
        const double dy = centroid.y - v.y;
        const double len = std::hypot(dx, dy);
        if (len < 1e-9) continue;
        const double ux = dx / len;
        const double uy = dy / len;
        for (double t = len; t < len + limit; t += 0.5) {
            const double sx = centroid.x + ux * (t - len);
            const double sy = centroid.y + uy * (t - len);
            const long px = std::llround(sx);
            const long py = std::llround(sy);
            if (px < 0 || px >= mask.width || py < 0 || py >= mask.height) break;
            if (px == centroid_px && py == centroid_py) continue;
            if (contour.at(static_cast<int>(px), static_cast<int>(py)) != 0) {
                raw.push_back({static_cast<double>(px), static_cast<double>(py)});
                break;
            }
        }
    }

    // Deduplicate at 2-decimal precision, first occurrence kept.
    std::vector<Point2> out;
    std::set<std::pair<long, long>> seen;
    for (const auto& p : raw) {
        const std::pair<long, long> key{std::llround(round2(p.x) * 100.0),
                                        std::llround(round2(p.y) * 100.0)};
        if (seen.insert(key).second) out.push_back({round2(p.x), round2(p.y)});
    }
    return out;
}

std::vector<GraspCandidate> evaluate_pairs(std::vector<Point2> points, const BinaryMask& mask,
                                           const GripperSpec& grip, double gamma,
                                           double d_skip) {
    grip.validate();
    if (!(gamma > 0.0)) throw InputError("evaluate_pairs: gamma must be > 0");
    std::sort(points.begin(), points.end(), [](const Point2& a, const Point2& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });

    std::vector<GraspCandidate> out;
    std::vector<Point2> evaluated_midpoints;
    const double half_wid = 0.5 * grip.finger_thickness / gamma;
    // Clearance extends past each jaw face (free travel on both sides).
    const double ext_px = 2.0 * grip.clearance_extension / gamma;

    const int n = static_cast<int>(points.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Point2& a = points[i];
            const Point2& b = points[j];
            const Point2 mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};

            bool merged = false;
            for (const auto& m : evaluated_midpoints) {
                if (std::hypot(mid.x - m.x, mid.y - m.y) < d_skip) {
                    merged = true;
                    break;
                }
            }
            if (merged) continue;
            evaluated_midpoints.push_back(mid);

            const double nx_raw = -(b.y - a.y);
            const double ny_raw = b.x - a.x;
            const double nlen = std::hypot(nx_raw, ny_raw);
            if (nlen < 1e-12) continue;
            const Point2 normal{nx_raw / nlen, ny_raw / nlen};

            double t_plus = 0.0, t_minus = 0.0;
            const double span = normal_span(mask, mid, normal, &t_plus, &t_minus);
            if (span <= 0.0) continue;                  // degenerate touching pair
            if (span * gamma > 2.0 * grip.half_aperture) continue; // jaws cannot open

            GraspCandidate cand;
            cand.a = a;
            cand.b = b;
            cand.midpoint = mid;
            cand.normal = normal;
            cand.span_px = span;

            const double center_shift = 0.5 * (t_plus - t_minus);
            const double ccx = mid.x + normal.x * center_shift;
            const double ccy = mid.y + normal.y * center_shift;
            cand.main_rect = OrientedRect{ccx, ccy, normal.x, normal.y, span * 0.5, half_wid};
            cand.clearance_rect =
                OrientedRect{ccx, ccy, normal.x, normal.y, (span + ext_px) * 0.5, half_wid};

            const Coverage main_cov = rect_coverage(cand.main_rect, mask);
            const Coverage extra_cov = rect_coverage(cand.clearance_rect, mask);
            if (main_cov.total == 0) continue;
            cand.cov_main = main_cov.fraction();
            cand.cov_extra = extra_cov.fraction();
            cand.feasible = cand.cov_main >= kCovMainMin && cand.cov_extra < kCovExtraMax;
            out.push_back(cand);
        }
    }
    return out;
}

ObjectFeasibility evaluate_object(const ObjectMask2D& obj, const GripperSpec& grip) {
    obj.validate();
    ObjectFeasibility feas;
    feas.bbox_ok = bbox_feasible(obj, grip);
    feas.morph_ok = morph_feasible(obj, grip);
    const auto points = candidate_points(obj.mask, grip, obj.gamma);
    if (points.size() >= 2)
        feas.candidates = evaluate_pairs(points, obj.mask, grip, obj.gamma);
    for (const auto& c : feas.candidates) {
        if (c.feasible) {
            feas.advanced_ok = true;
            break;
        }
    }
    return feas;
}

void accumulate_masks(FeasibilityMasks& out, const ObjectMask2D& obj,
                      const ObjectFeasibility& feas) {
    require_same_shape(out.bbox.width, out.bbox.height, obj.mask.width, obj.mask.height,
                       "accumulate_masks");
    auto or_into = [&](BinaryMask& dst) {
        for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] |= (obj.mask.data[i] != 0);
    };
    if (feas.bbox_ok) or_into(out.bbox);
    if (feas.morph_ok) or_into(out.morph);
    if (feas.advanced_ok) or_into(out.adv_obj);
    for (const auto& c : feas.candidates)
        if (c.feasible) fill_rect(c.main_rect, out.adv_rect);
}

} // namespace guider::grasp
