#pragma once

#include <complex>
#include <span>
#include <vector>

#include "exdeblur/image.hpp"

namespace exdeblur {

using Complex = std::complex<double>;

/// Full complex 2D DFT of a real field, row-major, unnormalized forward.
struct Spectrum {
    int width = 0;
    int height = 0;
    std::vector<Complex> bins;

    Complex operator()(int u, int v) const noexcept {
        return bins[static_cast<std::size_t>(v) * width + u];
    }
};

/// Forward transform F(x)(u) = sum_x x e^{-2 pi i u.x / N}.
Spectrum dft(const GrayImage& img);
Spectrum dft(std::span<const double> data, int width, int height);

/// Inverse transform including the 1/N factor; returns the real part.
std::vector<double> idft_real(const Spectrum& s);
GrayImage idft_image(const Spectrum& s);

/// Transfer function of a small filter of size kw x kh whose center
/// (kw/2, kh/2) is moved to the origin of a width x height periodic grid.
Spectrum filter_otf(std::span<const double> taps, int kw, int kh, int width, int height);

/// Transfer functions of the horizontal and vertical forward differences
/// used by gradient().
Spectrum dx_otf(int width, int height);
Spectrum dy_otf(int width, int height);

/// Elementwise product, optionally conjugating the left operand.
Spectrum multiply(const Spectrum& a, const Spectrum& b, bool conj_a = false);

}  // namespace exdeblur
