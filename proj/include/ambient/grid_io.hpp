#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ambient/image.hpp"

namespace ambient {

// Grid container: 16-byte header (magic "IGRD", u32 width, u32 height,
// u32 flags) followed by little-endian float32, row-major.
void write_grid(const std::filesystem::path& path, const ImageGrid& img);
ImageGrid read_grid(const std::filesystem::path& path);

// 8-bit grayscale PNG, min-max windowed. Inspection only; never read back.
void write_grid_png(const std::filesystem::path& path, const ImageGrid& img);

// Low-level PNG encoder (8-bit; channels = 1 gray or 3 RGB).
void write_png(const std::filesystem::path& path, int width, int height, int channels,
               const std::vector<std::uint8_t>& pixels);

}  // namespace ambient
