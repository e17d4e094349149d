#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "exdeblur/image.hpp"
#include "exdeblur/kernel.hpp"
#include "exdeblur/restoration.hpp"

namespace exdeblur {

/// Maximum normalized cross-correlation of two kernels over all integer
/// shifts (supports zero-padded to a common size).
double kernel_similarity(const BlurKernel& estimate, const BlurKernel& truth);

/// Levin-style error ratio ||I_est - I_gt||^2 / ||I_ktrue - I_gt||^2 where
/// I_ktrue restores `blurred` with the true kernel. Both norms are taken
/// over the image minus a ceil(kernel/2) border.
double error_ratio(const GrayImage& estimate, const GrayImage& ground_truth,
                   const GrayImage& blurred, const BlurKernel& true_kernel,
                   const RestoreConfig& cfg = {});
/// Same, with the true-kernel restoration supplied by the caller.
double error_ratio_with_reference(const GrayImage& estimate, const GrayImage& ground_truth,
                                  const GrayImage& reference, int kernel_size);

/// Peak signal-to-noise ratio for [0,1] images; +infinity when identical.
double psnr(const GrayImage& a, const GrayImage& b);

struct BenchRecord {
    std::string image_id;
    std::string kernel_id;
    double noise_level = 0.0;
    double kernel_similarity = 0.0;
    double error_ratio = 0.0;
    double psnr_db = 0.0;
    bool failed = false;
    std::string message;
};

struct ErrorCurve {
    std::vector<double> thresholds;
    std::vector<double> fractions;
};

/// Fraction of records with error_ratio <= r for r = 1.0, 1.1, ..., 5.0.
/// Failed records count as exceeding every threshold.
ErrorCurve cumulative_error_curve(const std::vector<BenchRecord>& records);

void write_bench_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path);
void write_curve_csv(const ErrorCurve& curve, const std::filesystem::path& path);

}  // namespace exdeblur
