#pragma once

#include <cmath>
#include <vector>

#include "guider/image.hpp"
#include "guider/mask_ops.hpp"

namespace guider::grasp {

using maskops::Point2;

/// Parallel-jaw gripper geometry. half_aperture is r (max opening 2r);
/// changing r adapts every test to another tool width.
struct GripperSpec {
    double half_aperture = 0.0425;      // meters
    double finger_thickness = 0.00825;  // meters (w_f)
    double clearance_extension = 0.002; // meters of free jaw travel past each face

    void validate() const {
        if (!(half_aperture > 0.0)) throw ConfigError("gripper: half_aperture must be > 0");
        if (!(finger_thickness > 0.0)) throw ConfigError("gripper: finger_thickness must be > 0");
        if (!(clearance_extension >= 0.0))
            throw ConfigError("gripper: clearance_extension must be >= 0");
    }
};

// Coverage thresholds for the contour-pair test.
inline constexpr double kCovMainMin = 0.99;
inline constexpr double kCovExtraMax = 0.95;

/// A segmented object in the image plane with its metric scale
/// gamma = Z_obj / fx (meters per pixel at the object's median depth).
struct ObjectMask2D {
    BinaryMask mask;
    double z_obj = 0.0;
    double gamma = 0.0;

    void validate() const {
        if (maskops::count_set(mask) == 0) throw InputError("ObjectMask2D: empty mask");
        if (!(z_obj > 0.0) || !(gamma > 0.0))
            throw InputError("ObjectMask2D: needs positive depth and scale");
    }
};

/// Builds the object view with Z_obj = median valid depth over mask pixels.
ObjectMask2D make_object_mask(BinaryMask mask, const DepthImage& depth, double fx);

/// Oriented min-area rectangle side lengths in pixels. Computed over pixel
/// centers (rotating calipers on the convex hull); the reported sides add the
/// 1 px pixel footprint so an axis-aligned k-px-wide bar measures k.
struct RectSize {
    double side_a = 0.0;
    double side_b = 0.0;
    double min_side() const { return side_a < side_b ? side_a : side_b; }
};
RectSize min_area_rect(const std::vector<Point2>& pixel_centers);

/// min(w_m, h_m) <= 2r with w_m = w_px * gamma.
bool bbox_feasible(const ObjectMask2D& obj, const GripperSpec& grip);

/// Structuring-element radius in pixels: round(r / gamma), at least 1.
int disk_radius_px(const ObjectMask2D& obj, const GripperSpec& grip);

/// Erosion with the r/gamma disk empties the mask -> the object fits between
/// the jaws.
bool morph_feasible(const ObjectMask2D& obj, const GripperSpec& grip);

/// Candidate grasp-contact points: hull vertices of the full mask, hull
/// vertices of each leftover component after disk erosion, and opposite
/// corners (first contour pixel hit marching from the centroid away from each
/// hull vertex; rays leaving the image record nothing). Duplicates removed by
/// rounding to 2 decimals, first occurrence kept.
std::vector<Point2> candidate_points(const BinaryMask& mask, const GripperSpec& grip,
                                     double gamma);

struct OrientedRect {
    double cx = 0.0, cy = 0.0;   // center, pixels
    double ax = 0.0, ay = 0.0;   // unit axis along the rectangle length
    double half_len = 0.0;
    double half_wid = 0.0;

    bool contains(double px, double py) const {
        const double dx = px - cx;
        const double dy = py - cy;
        const double along = dx * ax + dy * ay;
        const double across = -dx * ay + dy * ax;
        return std::abs(along) <= half_len && std::abs(across) <= half_wid;
    }
};

struct GraspCandidate {
    Point2 a, b;        // the contour pair
    Point2 midpoint;
    Point2 normal;      // unit inward normal (-(yB-yA), xB-xA)
    double span_px = 0.0;   // in-mask traversal length along +-normal
    double cov_main = 0.0;
    double cov_extra = 0.0;
    bool feasible = false;
    OrientedRect main_rect;
    OrientedRect clearance_rect;
};

/// Evaluates unordered candidate pairs in canonical order. Pairs whose
/// midpoints fall within d_skip px of an already-evaluated pair are merged
/// (first kept); pairs with zero span or span*gamma > 2r are discarded.
/// Coverage counts rectangle lattice cells by center, with off-image cells in
/// the denominator (they can never cover the object). Feasible iff
/// cov_main >= 0.99 and cov_extra < 0.95.
std::vector<GraspCandidate> evaluate_pairs(std::vector<Point2> points, const BinaryMask& mask,
                                           const GripperSpec& grip, double gamma,
                                           double d_skip = 1.0);

struct FeasibilityMasks {
    BinaryMask bbox;
    BinaryMask morph;
    BinaryMask adv_obj;
    BinaryMask adv_rect;

    FeasibilityMasks() = default;
    FeasibilityMasks(int w, int h)
        : bbox(w, h, 0), morph(w, h, 0), adv_obj(w, h, 0), adv_rect(w, h, 0) {}
};

struct ObjectFeasibility {
    bool bbox_ok = false;
    bool morph_ok = false;
    bool advanced_ok = false;
    std::vector<GraspCandidate> candidates;
};

/// Runs the three tests on one object.
ObjectFeasibility evaluate_object(const ObjectMask2D& obj, const GripperSpec& grip);

/// ORs the object's pixels into the masks its verdicts earn, and feasible
/// main rectangles into adv_rect (in-image pixels only).
void accumulate_masks(FeasibilityMasks& out, const ObjectMask2D& obj,
                      const ObjectFeasibility& feas);

} // namespace guider::grasp
