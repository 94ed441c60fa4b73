#include "guider/heatmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "guider/io/pgm_io.hpp"

namespace guider::io {

namespace {

struct Rgb {
    std::uint8_t r, g, b;
};

// Ramp stops at v = 0, 64, 128, 192, 255 (of the 8-bit value).
constexpr std::array<Rgb, 5> kStops = {{
    {0, 0, 32},     // near-black blue
    {0, 64, 255},   // blue
    {0, 255, 255},  // cyan
    {255, 255, 0},  // yellow
    {255, 0, 0},    // red
}};

Rgb colormap(int v255) {
    const int seg = std::min(v255 / 64, 3);
    const int off = v255 - seg * 64;            // 0..63 (64th step of last seg hits 255)
    const int den = (seg == 3) ? 63 : 64;
    auto lerp = [&](int a, int b) {
        return static_cast<std::uint8_t>(a + (b - a) * off / den);
    };
    const Rgb& lo = kStops[seg];
    const Rgb& hi = kStops[seg + 1];
    return {lerp(lo.r, hi.r), lerp(lo.g, hi.g), lerp(lo.b, hi.b)};
}

} // namespace

void render_heatmap(const ScalarField& field, const std::filesystem::path& out_path) {
    if (field.empty()) throw InputError("render_heatmap: empty field");

    constexpr int kLegendRows = 8;
    const int w = field.width;
    const int h = field.height + kLegendRows;
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * h * 3, 0);

    int peak_x = 0, peak_y = 0;
    double peak_v = field.data[0];
    auto put = [&](int x, int y, Rgb c) {
        const std::size_t i = (static_cast<std::size_t>(y) * w + x) * 3;
        rgb[i] = c.r;
        rgb[i + 1] = c.g;
        rgb[i + 2] = c.b;
    };

    for (int y = 0; y < field.height; ++y) {
        for (int x = 0; x < w; ++x) {
            const double v = std::clamp(field.at(x, y), 0.0, 1.0);
            if (v > peak_v) {
                peak_v = v;
                peak_x = x;
                peak_y = y;
            }
            put(x, y, colormap(static_cast<int>(std::lround(v * 255.0))));
        }
    }
    put(peak_x, peak_y, {255, 255, 255});

    for (int y = field.height; y < h; ++y)
        for (int x = 0; x < w; ++x)
            put(x, y, colormap(w > 1 ? x * 255 / (w - 1) : 0));

    write_ppm(rgb, w, h, out_path);
}

} // namespace guider::io
