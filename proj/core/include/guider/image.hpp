#pragma once

#include <cstdint>
#include <vector>

#include "guider/errors.hpp"

namespace guider {

/// Row-major 2D buffer. at(x, y) addresses column x of row y; index(x, y)
/// is the row-major cell index used wherever the project breaks ties
/// ("lowest row-major index" = smallest y, then smallest x).
template <typename T>
struct Image {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, T fill = T{})
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {
        if (w < 0 || h < 0) throw InputError("Image: negative dimensions");
    }

    bool empty() const { return data.empty(); }
    std::size_t size() const { return data.size(); }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * width + x;
    }

    T& at(int x, int y) { return data[index(x, y)]; }
    const T& at(int x, int y) const { return data[index(x, y)]; }

    bool same_shape(int w, int h) const { return width == w && height == h; }
};

using BinaryMask = Image<std::uint8_t>;
using ProbabilityImage = Image<double>;
using DepthImage = Image<float>; // meters; 0 or NaN marks invalid depth
using ScalarField = Image<double>;

inline void require_same_shape(int w1, int h1, int w2, int h2, const char* what) {
    if (w1 != w2 || h1 != h2) throw InputError(std::string(what) + ": dimension mismatch");
}

} // namespace guider
