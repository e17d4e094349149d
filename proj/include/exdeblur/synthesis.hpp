#pragma once

#include <cstdint>

#include "exdeblur/image.hpp"
#include "exdeblur/kernel.hpp"

namespace exdeblur {

/// Shape parameters of the camera-shake random walk.
struct TrajectoryParams {
    std::uint64_t seed = 0;
    int num_samples = 2000;
    /// Standard deviation of the per-sample Gaussian velocity impulse.
    double impulse = 0.005;
    /// Magnitude of the rare large jerks.
    double anxiety = 0.1;
    /// Leading fraction of the trajectory that is integrated into the kernel.
    double exposure_fraction = 1.0;
};

inline constexpr int kMinSynthKernelSize = 13;
inline constexpr int kMaxSynthKernelSize = 75;

/// Momentum-driven 3D random walk, projected to the image plane, scaled to
/// the support, bilinearly splatted and normalized to unit sum.
/// Deterministic for fixed params. Throws ValueError for an even size or a
/// size outside [13, 75].
BlurKernel synth_kernel(const TrajectoryParams& params, int size);

/// Circular blur followed by i.i.d. Gaussian noise (std noise_sigma, as a
/// fraction of the [0,1] range) and clipping to [0,1].
GrayImage apply_blur(const GrayImage& img, const BlurKernel& k, double noise_sigma,
                     std::uint64_t seed);

}  // namespace exdeblur
