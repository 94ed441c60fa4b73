#include "guider/mask_ops.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace guider::maskops {

std::vector<std::vector<int>> connected_components(const BinaryMask& mask, int connectivity) {
    if (connectivity != 4 && connectivity != 8)
        throw InputError("connected_components: connectivity must be 4 or 8");
    const int w = mask.width;
    const int h = mask.height;
    std::vector<int> label(mask.size(), -1);
    std::vector<std::vector<int>> components;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int idx = static_cast<int>(mask.index(x, y));
            if (mask.data[idx] == 0 || label[idx] >= 0) continue;
            const int id = static_cast<int>(components.size());
            components.emplace_back();
            std::queue<std::pair<int, int>> queue;
            queue.emplace(x, y);
            label[idx] = id;
            while (!queue.empty()) {
                const auto [cx, cy] = queue.front();
                queue.pop();
                components[id].push_back(static_cast<int>(mask.index(cx, cy)));
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        if (connectivity == 4 && dx != 0 && dy != 0) continue;
                        const int nx = cx + dx;
                        const int ny = cy + dy;
                        if (!mask.in_bounds(nx, ny)) continue;
                        const int nidx = static_cast<int>(mask.index(nx, ny));
                        if (mask.data[nidx] == 0 || label[nidx] >= 0) continue;
                        label[nidx] = id;
                        queue.emplace(nx, ny);
                    }
                }
            }
            std::sort(components[id].begin(), components[id].end());
        }
    }
    return components;
}

BinaryMask erode_disk(const BinaryMask& mask, int radius_px) {
    if (radius_px < 0) throw InputError("erode_disk: negative radius");
    std::vector<std::pair<int, int>> offsets;
    for (int dy = -radius_px; dy <= radius_px; ++dy)
        for (int dx = -radius_px; dx <= radius_px; ++dx)
            if (dx * dx + dy * dy <= radius_px * radius_px) offsets.emplace_back(dx, dy);

    BinaryMask out(mask.width, mask.height, 0);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (mask.at(x, y) == 0) continue;
            bool survives = true;
            for (const auto& [dx, dy] : offsets) {
                const int nx = x + dx;
                const int ny = y + dy;
                if (!mask.in_bounds(nx, ny) || mask.at(nx, ny) == 0) {
                    survives = false;
                    break;
                }
            }
            if (survives) out.at(x, y) = 1;
        }
    }
    return out;
}

long count_set(const BinaryMask& mask) {
    long n = 0;
    for (const auto v : mask.data) n += (v != 0);
    return n;
}

Point2 mask_centroid(const BinaryMask& mask) {
    double sx = 0.0, sy = 0.0;
    long n = 0;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (mask.at(x, y) == 0) continue;
            sx += x;
            sy += y;
            ++n;
        }
    }
    if (n == 0) throw InputError("mask_centroid: empty mask");
    return {sx / n, sy / n};
}

BinaryMask contour_of(const BinaryMask& mask) {
    BinaryMask out(mask.width, mask.height, 0);
    constexpr int kOff[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (mask.at(x, y) == 0) continue;
            for (const auto& off : kOff) {
                const int nx = x + off[0];
                const int ny = y + off[1];
                if (!mask.in_bounds(nx, ny) || mask.at(nx, ny) == 0) {
                    out.at(x, y) = 1;
                    break;
                }
            }
        }
    }
    return out;
}

std::vector<Point2> convex_hull(std::vector<Point2> points) {
    std::sort(points.begin(), points.end(), [](const Point2& a, const Point2& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    points.erase(std::unique(points.begin(), points.end(),
                             [](const Point2& a, const Point2& b) {
                                 return a.x == b.x && a.y == b.y;
                             }),
                 points.end());
    const int n = static_cast<int>(points.size());
    if (n < 3) return points;

    auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<Point2> hull(2 * n);
    int k = 0;
    for (int i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
        hull[k++] = points[i];
    }
    for (int i = n - 2, lower = k + 1; i >= 0; --i) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
        hull[k++] = points[i];
    }
    hull.resize(k - 1);
    return hull;
}

std::vector<Point2> set_pixel_centers(const BinaryMask& mask) {
    std::vector<Point2> out;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y) != 0) out.push_back({static_cast<double>(x), static_cast<double>(y)});
    return out;
}

} // namespace guider::maskops
