#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "guider/image.hpp"

namespace guider::io {

/// Binary PGM (P5), 8-bit.
Image<std::uint8_t> read_pgm8(const std::filesystem::path& path);
void write_pgm8(const Image<std::uint8_t>& img, const std::filesystem::path& path);

/// Binary PGM (P5), 16-bit big-endian (maxval 65535).
Image<std::uint16_t> read_pgm16(const std::filesystem::path& path);
void write_pgm16(const Image<std::uint16_t>& img, const std::filesystem::path& path);

/// Binary PPM (P6), 8-bit RGB interleaved.
void write_ppm(const std::vector<std::uint8_t>& rgb, int width, int height,
               const std::filesystem::path& path);

/// Scalar field scaled to 0..255 (values clamped to [0,1]).
void write_field_pgm(const ScalarField& field, const std::filesystem::path& path);

/// Raw float32 row-major dump, bit-exact for regression tests.
void write_field_f32(const ScalarField& field, const std::filesystem::path& path);
ScalarField read_field_f32(const std::filesystem::path& path, int width, int height);

/// Flat `key=value` text files ('#' comments, blank lines ignored).
std::map<std::string, std::string> read_keyvalue(const std::filesystem::path& path);
void write_keyvalue(const std::map<std::string, std::string>& kv,
                    const std::filesystem::path& path);

} // namespace guider::io
