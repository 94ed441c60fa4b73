#pragma once

#include <filesystem>

#include "guider/image.hpp"

namespace guider::io {

/// Renders a scalar field (clamped to [0,1]) as a P6 PPM. Colormap is a fixed
/// black-blue-cyan-yellow-red ramp evaluated in integer math, the peak cell
/// (lowest row-major argmax) is marked white, and an 8-row legend strip with
/// the full ramp is appended below the field. Byte-identical for identical
/// fields.
void render_heatmap(const ScalarField& field, const std::filesystem::path& out_path);

} // namespace guider::io
