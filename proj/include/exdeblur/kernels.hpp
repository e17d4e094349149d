#pragma once

// Data-parallel inner loops. Each routine has an OpenMP version (used by the
// public operations) and a serial twin with identical arithmetic order per
// output element, kept for cross-checking and benchmarking.

#include <span>
#include <vector>

#include "exdeblur/image.hpp"

namespace exdeblur::kernels {

/// Periodic convolution: out(x,y) = sum_ab taps(a,b) img(x-a+r, y-b+r).
std::vector<double> convolve_circular_serial(const GrayImage& img, std::span<const double> taps,
                                             int ksize);
std::vector<double> convolve_circular_parallel(const GrayImage& img,
                                               std::span<const double> taps, int ksize);

/// Mean over a (2r+1)^2 window with replicate borders.
std::vector<double> box_mean_serial(std::span<const double> in, int width, int height, int radius);
std::vector<double> box_mean_parallel(std::span<const double> in, int width, int height,
                                      int radius);

/// One multi-channel "same" correlation layer with replicate padding:
/// out[o](y,x) = bias[o] + sum_i sum_ab w[o][i][a][b] in[i](y+a-kh/2, x+b-kw/2),
/// with a indexing kernel rows and b kernel columns.
/// Feature maps are stored channel-major in one contiguous buffer.
struct LayerShape {
    int in_channels;
    int out_channels;
    int kh;
    int kw;
};
std::vector<double> correlate_layer_serial(std::span<const double> input, int width, int height,
                                           const LayerShape& shape,
                                           std::span<const float> weights,
                                           std::span<const float> bias);
std::vector<double> correlate_layer_parallel(std::span<const double> input, int width,
                                             int height, const LayerShape& shape,
                                             std::span<const float> weights,
                                             std::span<const float> bias);

/// Runs fn(i) for i in [0, n), in parallel when OpenMP is available.
template <class F>
void parallel_for(int n, F&& fn) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) fn(i);
#else
    for (int i = 0; i < n; ++i) fn(i);
#endif
}

}  // namespace exdeblur::kernels
