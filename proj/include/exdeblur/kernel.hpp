#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "exdeblur/image.hpp"

namespace exdeblur {

/// Square, odd-sized, non-negative point-spread function summing to one.
class BlurKernel {
public:
    /// Validates the invariants; throws ValueError on violation.
    BlurKernel(int size, std::vector<double> data);

    /// Clamps negatives to zero and rescales to unit sum.
    static BlurKernel normalized(int size, std::vector<double> data);
    static BlurKernel delta(int size);

    int size() const noexcept { return size_; }
    int radius() const noexcept { return size_ / 2; }
    double operator()(int x, int y) const noexcept {
        return data_[static_cast<std::size_t>(y) * size_ + x];
    }
    std::span<const double> data() const noexcept { return data_; }

    /// Intensity-weighted centroid in kernel pixel coordinates.
    std::pair<double, double> center_of_mass() const noexcept;
    /// Copy zero-embedded into a larger odd support, keeping the center.
    BlurKernel padded(int new_size) const;

private:
    int size_;
    std::vector<double> data_;
};

/// Text format: a `KERN <size>` header line followed by size*size
/// whitespace-separated decimals, row-major.
BlurKernel read_kernel(const std::filesystem::path& path);
void write_kernel(const BlurKernel& k, const std::filesystem::path& path);
/// Max-normalized 8-bit PGM for viewing.
void export_kernel_pgm(const BlurKernel& k, const std::filesystem::path& path);

}  // namespace exdeblur
