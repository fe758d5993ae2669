#pragma once

#include <array>
#include <filesystem>

#include "kpath/image.hpp"

namespace kpath {

/// Planar 8-bit color image: one plane per channel.
struct RgbImage {
    GrayImage r, g, b;
};

/// Decodes a TIF or PNG file into RGB planes. Grayscale sources are replicated
/// into all three planes. Throws std::runtime_error naming the file on failure.
RgbImage read_rgb(const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG.
void write_png(const std::filesystem::path& path, const GrayImage& img);

/// Writes an 8-bit RGB TIF (uncompressed). Used to build fixture directories.
void write_tiff(const std::filesystem::path& path, const RgbImage& img);

}  // namespace kpath
