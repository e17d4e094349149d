#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "exdeblur/image.hpp"

namespace exdeblur {

/// Binary map selecting informative structure (face contour, eyes, mouth).
class ContourMask {
public:
    ContourMask() = default;
    ContourMask(int width, int height, std::uint8_t fill = 0);
    /// Values must be 0 or 1.
    ContourMask(int width, int height, std::vector<std::uint8_t> data);
    /// Pixels >= threshold become 1.
    static ContourMask binarize(const GrayImage& img, double threshold);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool operator()(int x, int y) const noexcept {
        return data_[static_cast<std::size_t>(y) * width_ + x] != 0;
    }
    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::size_t count() const noexcept;
    GrayImage to_image() const;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

struct GuidedFilterParams {
    int radius = 8;
    double eps = 0.04;
};

/// He et al. local linear guided filter, box sums with replicate borders.
GrayImage guided_filter(const GrayImage& guide, const GrayImage& input, int radius, double eps);

/// Otsu threshold over 256 equal bins of [0,1]; ties resolve to the lowest
/// bin. Returns the upper edge (t+1)/256 of the winning bin t, so the
/// foreground class is {v >= threshold}. Throws DegenerateInputError on a
/// constant image.
double otsu_threshold(const GrayImage& img);

/// Zeroes both gradient channels wherever the mask is 0.
GradientField gate(const GradientField& g, const ContourMask& mask);

/// Refines the initial mask by guided filtering it with the sharp image as
/// guide, binarizes at the Otsu threshold of the filtered mask and gates
/// the sharp gradients with the result.
std::pair<GradientField, ContourMask> extract_salient_edges(const GrayImage& sharp,
                                                             const ContourMask& initial_mask,
                                                             int radius = 8, double eps = 0.04);

/// L0 gradient smoothing: min ||S - img||^2 + lambda_s ||grad S||_0 by
/// half-quadratic splitting (beta from 2 lambda_s, doubling past 1e5).
GrayImage l0_smooth(const GrayImage& img, double lambda_s = 0.02);

/// Mask files: PGM/PNG binarized at 0.5, or polygon text (`POLY n` and n
/// `x y` lines per region, even-odd fill). Polygon files need the target
/// size.
ContourMask load_mask(const std::filesystem::path& path, int width = 0, int height = 0);
void save_mask(const ContourMask& mask, const std::filesystem::path& path);

using Polygon = std::vector<std::pair<double, double>>;
/// Even-odd rasterization sampled at pixel centers.
ContourMask rasterize_polygons(std::span<const Polygon> polygons, int width, int height);

}  // namespace exdeblur
