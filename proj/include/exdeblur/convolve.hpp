#pragma once

#include "exdeblur/image.hpp"
#include "exdeblur/kernel.hpp"

namespace exdeblur {

/// Periodic 2D convolution with the kernel centered, evaluated through
/// the DFT. Throws DimensionError if the kernel exceeds the image.
GrayImage convolve_circular(const GrayImage& img, const BlurKernel& kernel);

/// Same as convolve_circular for a raw (possibly signed) square filter.
GrayImage convolve_circular(const GrayImage& img, std::span<const double> taps, int ksize);

/// Direct spatial-domain evaluation; O(N K^2). Parallel over rows.
GrayImage convolve_circular_spatial(const GrayImage& img, const BlurKernel& kernel);

}  // namespace exdeblur
