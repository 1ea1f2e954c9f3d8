#pragma once

#include <filesystem>

#include "shuffleguard/image.hpp"

namespace shuffleguard {

// Reads any PNG as 8-bit RGB (palette, gray, and alpha inputs are
// converted). Unreadable or non-PNG files raise dataset_error.
ByteImage read_png_rgb8(const std::filesystem::path& path);

// Writes an H x W x 3 byte image as an RGB PNG.
void write_png_rgb8(const std::filesystem::path& path, const ByteImage& image);

}  // namespace shuffleguard
