#pragma once

#include <filesystem>

#include "exdeblur/image.hpp"

namespace exdeblur {

/// Reads PNG (8/16-bit gray, gray+alpha, RGB, RGBA, palette) or binary
/// PGM (P5). Color is reduced to luma 0.299 R + 0.587 G + 0.114 B; alpha
/// is ignored. Values are scaled to [0,1].
GrayImage load_image(const std::filesystem::path& path);

/// Writes 8-bit gray PNG or PGM, chosen by extension. Values are clamped
/// to [0,1] and quantized with round-half-up.
void save_image(const GrayImage& img, const std::filesystem::path& path);

/// Per-channel RGB load for color restoration. Gray files yield three
/// identical channels.
struct RgbImage {
    GrayImage r, g, b;
};
RgbImage load_rgb(const std::filesystem::path& path);
void save_rgb(const RgbImage& img, const std::filesystem::path& path);
bool is_color_file(const std::filesystem::path& path);

}  // namespace exdeblur
