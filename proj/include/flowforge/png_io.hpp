#pragma once

#include <cstdint>
#include <filesystem>

#include "flowforge/image.hpp"

namespace flowforge {

// Minimal 8-bit PNG support (grayscale and RGB, non-interlaced), enough for
// the toolkit's own artifacts. Compression is zlib's.

void write_png_rgb8(const std::filesystem::path& path, const Image<Rgb>& img);
void write_png_gray8(const std::filesystem::path& path, const Image<std::uint8_t>& img);

Image<Rgb> read_png_rgb8(const std::filesystem::path& path);       // accepts gray/RGB/RGBA
Image<std::uint8_t> read_png_gray8(const std::filesystem::path& path);

}  // namespace flowforge
