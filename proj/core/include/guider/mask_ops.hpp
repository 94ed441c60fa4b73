#pragma once

#include <utility>
#include <vector>

#include "guider/image.hpp"

namespace guider::maskops {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Connected components of set pixels; each component is a sorted list of
/// row-major indices. Components are emitted in scan order of their first
/// pixel. connectivity is 4 or 8.
std::vector<std::vector<int>> connected_components(const BinaryMask& mask, int connectivity);

/// Binary erosion with a disk structuring element {(dx,dy): dx^2+dy^2 <= r^2}.
/// Pixels whose disk leaves the image die (outside counts as background).
BinaryMask erode_disk(const BinaryMask& mask, int radius_px);

long count_set(const BinaryMask& mask);

/// Mean of set pixel centers. Throws InputError on an empty mask.
Point2 mask_centroid(const BinaryMask& mask);

/// Set pixels with at least one 4-neighbor outside the mask (or the image).
BinaryMask contour_of(const BinaryMask& mask);

/// Convex hull of points (monotone chain, CCW, collinear points dropped).
/// Returns the input for fewer than 3 distinct points.
std::vector<Point2> convex_hull(std::vector<Point2> points);

/// Pixel centers of set pixels, scan order.
std::vector<Point2> set_pixel_centers(const BinaryMask& mask);

} // namespace guider::maskops
