#include "exdeblur/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "exdeblur/error.hpp"
#include "exdeblur/fft.hpp"

namespace exdeblur {

namespace {

int wrap_index(int i, int n) noexcept {
    i %= n;
    return i < 0 ? i + n : i;
}

void require_same_shape(const GrayImage& a, const GrayImage& b, const char* what) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(what) + ": image sizes differ (" +
                             std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                             " vs " + std::to_string(b.width()) + "x" +
                             std::to_string(b.height()) + ")");
    }
}

}  // namespace

GrayImage::GrayImage(int width, int height, double fill)
    : GrayImage(width, height,
                std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                        static_cast<std::size_t>(std::max(height, 0)),
                                    fill)) {}

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width <= 0 || height <= 0) {
        throw DimensionError("image dimensions must be positive");
    }
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DimensionError("image data length does not match width*height");
    }
    for (double v : data_) {
        if (!std::isfinite(v)) throw ValueError("image contains non-finite values");
    }
}

double GrayImage::wrapped(int x, int y) const noexcept {
    return (*this)(wrap_index(x, width_), wrap_index(y, height_));
}

double GrayImage::clamped(int x, int y) const noexcept {
    return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
}

std::vector<double> GrayImage::release() && noexcept {
    width_ = height_ = 0;
    return std::move(data_);
}

double GrayImage::sum() const noexcept { return std::accumulate(data_.begin(), data_.end(), 0.0); }

double GrayImage::mean() const noexcept {
    return data_.empty() ? 0.0 : sum() / static_cast<double>(data_.size());
}

double GrayImage::min() const noexcept {
    return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end());
}

double GrayImage::max() const noexcept {
    return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
}

GradientField::GradientField(GrayImage dx_, GrayImage dy_) : dx(std::move(dx_)), dy(std::move(dy_)) {
    require_same_shape(dx, dy, "GradientField");
}

GradientField GradientField::zeros(int width, int height) {
    return {GrayImage(width, height), GrayImage(width, height)};
}

double GradientField::energy() const noexcept {
    double e = 0.0;
    for (double v : dx.data()) e += v * v;
    for (double v : dy.data()) e += v * v;
    return e;
}

bool GradientField::is_zero() const noexcept {
    auto nz = [](double v) { return v != 0.0; };
    return std::none_of(dx.data().begin(), dx.data().end(), nz) &&
           std::none_of(dy.data().begin(), dy.data().end(), nz);
}

GradientField gradient(const GrayImage& img) {
    const int w = img.width();
    const int h = img.height();
    std::vector<double> gx(img.size());
    std::vector<double> gy(img.size());
    for (int y = 0; y < h; ++y) {
        const int yn = (y + 1 == h) ? 0 : y + 1;
        for (int x = 0; x < w; ++x) {
            const int xn = (x + 1 == w) ? 0 : x + 1;
            const double v = img(x, y);
            gx[static_cast<std::size_t>(y) * w + x] = img(xn, y) - v;
            gy[static_cast<std::size_t>(y) * w + x] = img(x, yn) - v;
        }
    }
    return {GrayImage(w, h, std::move(gx)), GrayImage(w, h, std::move(gy))};
}

GrayImage gradient_adjoint(const GradientField& g) {
    const int w = g.width();
    const int h = g.height();
    std::vector<double> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const int yp = (y == 0) ? h - 1 : y - 1;
        for (int x = 0; x < w; ++x) {
            const int xp = (x == 0) ? w - 1 : x - 1;
            out[static_cast<std::size_t>(y) * w + x] =
                (g.dx(xp, y) - g.dx(x, y)) + (g.dy(x, yp) - g.dy(x, y));
        }
    }
    return {w, h, std::move(out)};
}

GrayImage poisson_reconstruct(const GradientField& g) {
    const int w = g.width();
    const int h = g.height();
    const Spectrum fdx = dx_otf(w, h);
    const Spectrum fdy = dy_otf(w, h);
    const Spectrum gx = dft(g.dx);
    const Spectrum gy = dft(g.dy);
    Spectrum sol{w, h, std::vector<Complex>(gx.bins.size())};
    for (std::size_t i = 0; i < sol.bins.size(); ++i) {
        const double den = std::norm(fdx.bins[i]) + std::norm(fdy.bins[i]);
        if (den < 1e-12) {
            sol.bins[i] = 0.0;  // DC: fixed below
        } else {
            sol.bins[i] = (std::conj(fdx.bins[i]) * gx.bins[i] + std::conj(fdy.bins[i]) * gy.bins[i]) / den;
        }
    }
    std::vector<double> out = idft_real(sol);
    for (double& v : out) v += 0.5;
    return {w, h, std::move(out)};
}

GrayImage add(const GrayImage& a, const GrayImage& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
    return {a.width(), a.height(), std::move(out)};
}

GrayImage subtract(const GrayImage& a, const GrayImage& b) {
    require_same_shape(a, b, "subtract");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
    return {a.width(), a.height(), std::move(out)};
}

GrayImage scale(const GrayImage& a, double s, double offset) {
    std::vector<double> out(a.data().begin(), a.data().end());
    for (double& v : out) v = s * v + offset;
    return {a.width(), a.height(), std::move(out)};
}

GrayImage clip(const GrayImage& a, double lo, double hi) {
    std::vector<double> out(a.data().begin(), a.data().end());
    for (double& v : out) v = std::clamp(v, lo, hi);
    return {a.width(), a.height(), std::move(out)};
}

double squared_distance(const GrayImage& a, const GrayImage& b) {
    require_same_shape(a, b, "squared_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        s += d * d;
    }
    return s;
}

GrayImage shift_circular(const GrayImage& img, int sx, int sy) {
    const int w = img.width();
    const int h = img.height();
    std::vector<double> out(img.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out[static_cast<std::size_t>(y) * w + x] = img.wrapped(x - sx, y - sy);
        }
    }
    return {w, h, std::move(out)};
}

GrayImage crop(const GrayImage& img, int x0, int y0, int w, int h) {
    if (x0 < 0 || y0 < 0 || w <= 0 || h <= 0 || x0 + w > img.width() || y0 + h > img.height()) {
        throw DimensionError("crop rectangle outside the image");
    }
    std::vector<double> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) out[static_cast<std::size_t>(y) * w + x] = img(x0 + x, y0 + y);
    }
    return {w, h, std::move(out)};
}

}  // namespace exdeblur
