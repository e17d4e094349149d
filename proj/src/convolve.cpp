#include "exdeblur/convolve.hpp"

#include "exdeblur/error.hpp"
#include "exdeblur/fft.hpp"
#include "exdeblur/kernels.hpp"

namespace exdeblur {

GrayImage convolve_circular(const GrayImage& img, std::span<const double> taps, int ksize) {
    if (ksize > img.width() || ksize > img.height()) {
        throw DimensionError("kernel larger than image");
    }
    const Spectrum fk = filter_otf(taps, ksize, ksize, img.width(), img.height());
    return idft_image(multiply(fk, dft(img)));
}

GrayImage convolve_circular(const GrayImage& img, const BlurKernel& kernel) {
    return convolve_circular(img, kernel.data(), kernel.size());
}

GrayImage convolve_circular_spatial(const GrayImage& img, const BlurKernel& kernel) {
    if (kernel.size() > img.width() || kernel.size() > img.height()) {
        throw DimensionError("kernel larger than image");
    }
    return {img.width(), img.height(),
            kernels::convolve_circular_parallel(img, kernel.data(), kernel.size())};
}

}  // namespace exdeblur
