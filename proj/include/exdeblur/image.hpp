#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace exdeblur {

/// Row-major 2D scalar field. Used for intensity images (nominal range
/// [0,1]) as well as for single gradient channels and CNN feature maps.
/// Every value is finite; this is checked when the image is built.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, double fill = 0.0);
    GrayImage(int width, int height, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double operator()(int x, int y) const noexcept {
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }
    /// Periodic access: coordinates are wrapped into the image.
    double wrapped(int x, int y) const noexcept;
    /// Replicate-border access: coordinates are clamped into the image.
    double clamped(int x, int y) const noexcept;

    std::span<const double> data() const noexcept { return data_; }
    /// Releases the pixel buffer, leaving the image empty.
    std::vector<double> release() && noexcept;

    bool same_shape(const GrayImage& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    double sum() const noexcept;
    double mean() const noexcept;
    double min() const noexcept;
    double max() const noexcept;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Horizontal and vertical derivative channels of an image.
struct GradientField {
    GrayImage dx;
    GrayImage dy;

    GradientField() = default;
    GradientField(GrayImage dx_, GrayImage dy_);
    static GradientField zeros(int width, int height);

    int width() const noexcept { return dx.width(); }
    int height() const noexcept { return dx.height(); }
    /// Sum of squares over both channels.
    double energy() const noexcept;
    bool is_zero() const noexcept;
};

/// Forward differences with the [-1, 1] filter and periodic wrap:
/// dx(x,y) = I(x+1,y) - I(x,y), dy(x,y) = I(x,y+1) - I(x,y).
GradientField gradient(const GrayImage& img);

/// Adjoint of gradient(): returns D_x^T gx + D_y^T gy.
GrayImage gradient_adjoint(const GradientField& g);

/// Least-squares integration of a gradient field under periodic boundary,
/// solved in the Fourier domain. The free constant is fixed so that the
/// output has mean 0.5.
GrayImage poisson_reconstruct(const GradientField& g);

// Elementwise helpers.
GrayImage add(const GrayImage& a, const GrayImage& b);
GrayImage subtract(const GrayImage& a, const GrayImage& b);
GrayImage scale(const GrayImage& a, double s, double offset = 0.0);
GrayImage clip(const GrayImage& a, double lo, double hi);
/// Sum of squared differences.
double squared_distance(const GrayImage& a, const GrayImage& b);
/// Translates with periodic wrap: out(x,y) = in(x - sx, y - sy).
GrayImage shift_circular(const GrayImage& img, int sx, int sy);
/// Returns the sub-rectangle [x0, x0+w) x [y0, y0+h).
GrayImage crop(const GrayImage& img, int x0, int y0, int w, int h);

}  // namespace exdeblur
