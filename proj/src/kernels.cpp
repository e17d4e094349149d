#include "exdeblur/kernels.hpp"

#include <algorithm>

namespace exdeblur::kernels {

namespace {

void convolve_row(const GrayImage& img, std::span<const double> taps, int ksize, int y,
                  double* out) {
    const int w = img.width();
    const int r = ksize / 2;
    for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int b = 0; b < ksize; ++b) {
            for (int a = 0; a < ksize; ++a) {
                acc += taps[static_cast<std::size_t>(b) * ksize + a] * img.wrapped(x - a + r, y - b + r);
            }
        }
        out[x] = acc;
    }
}

// Sliding window sum along one line with replicate borders.
void box_line(const double* in, double* out, int n, int stride, int radius) {
    auto at = [&](int i) { return in[static_cast<std::ptrdiff_t>(std::clamp(i, 0, n - 1)) * stride]; };
    double s = 0.0;
    for (int j = -radius; j <= radius; ++j) s += at(j);
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::ptrdiff_t>(i) * stride] = s;
        s += at(i + radius + 1) - at(i - radius);
    }
}

void box_rows(std::span<const double> in, std::vector<double>& tmp, int width, int y, int radius) {
    box_line(in.data() + static_cast<std::size_t>(y) * width, tmp.data() + static_cast<std::size_t>(y) * width,
             width, 1, radius);
}

void box_cols(const std::vector<double>& tmp, std::vector<double>& out, int width, int height, int x,
              int radius, double norm) {
    box_line(tmp.data() + x, out.data() + x, height, width, radius);
    for (int y = 0; y < height; ++y) out[static_cast<std::size_t>(y) * width + x] *= norm;
}

// Replicate-padded copy of one channel.
std::vector<double> pad_channel(const double* in, int width, int height, int py, int px) {
    const int pw = width + 2 * px;
    const int ph = height + 2 * py;
    std::vector<double> out(static_cast<std::size_t>(pw) * ph);
    for (int y = 0; y < ph; ++y) {
        const int sy = std::clamp(y - py, 0, height - 1);
        for (int x = 0; x < pw; ++x) {
            const int sx = std::clamp(x - px, 0, width - 1);
            out[static_cast<std::size_t>(y) * pw + x] = in[static_cast<std::size_t>(sy) * width + sx];
        }
    }
    return out;
}

void correlate_output_channel(const std::vector<std::vector<double>>& padded, int width, int height,
                              const LayerShape& s, std::span<const float> weights, float bias,
                              int o, double* out) {
    const std::size_t n = static_cast<std::size_t>(width) * height;
    const int pw = width + 2 * (s.kw / 2);
    std::fill(out, out + n, static_cast<double>(bias));
    for (int i = 0; i < s.in_channels; ++i) {
        const double* src = padded[static_cast<std::size_t>(i)].data();
        for (int a = 0; a < s.kh; ++a) {
            for (int b = 0; b < s.kw; ++b) {
                const double wv = weights[((static_cast<std::size_t>(o) * s.in_channels + i) * s.kh + a) * s.kw + b];
                if (wv == 0.0) continue;
                for (int y = 0; y < height; ++y) {
                    const double* row = src + static_cast<std::size_t>(y + a) * pw + b;
                    double* dst = out + static_cast<std::size_t>(y) * width;
                    for (int x = 0; x < width; ++x) dst[x] += wv * row[x];
                }
            }
        }
    }
}

std::vector<std::vector<double>> pad_all(std::span<const double> input, int width, int height,
                                         const LayerShape& s) {
    std::vector<std::vector<double>> padded(static_cast<std::size_t>(s.in_channels));
    const std::size_t n = static_cast<std::size_t>(width) * height;
    for (int i = 0; i < s.in_channels; ++i) {
        padded[static_cast<std::size_t>(i)] = pad_channel(input.data() + i * n, width, height, s.kh / 2, s.kw / 2);
    }
    return padded;
}

}  // namespace

std::vector<double> convolve_circular_serial(const GrayImage& img, std::span<const double> taps,
                                             int ksize) {
    std::vector<double> out(img.size());
    for (int y = 0; y < img.height(); ++y) {
        convolve_row(img, taps, ksize, y, out.data() + static_cast<std::size_t>(y) * img.width());
    }
    return out;
}

std::vector<double> convolve_circular_parallel(const GrayImage& img,
                                               std::span<const double> taps, int ksize) {
    std::vector<double> out(img.size());
    parallel_for(img.height(), [&](int y) {
        convolve_row(img, taps, ksize, y, out.data() + static_cast<std::size_t>(y) * img.width());
    });
    return out;
}

std::vector<double> box_mean_serial(std::span<const double> in, int width, int height, int radius) {
    std::vector<double> tmp(in.size());
    std::vector<double> out(in.size());
    const double norm = 1.0 / ((2.0 * radius + 1) * (2.0 * radius + 1));
    for (int y = 0; y < height; ++y) box_rows(in, tmp, width, y, radius);
    for (int x = 0; x < width; ++x) box_cols(tmp, out, width, height, x, radius, norm);
    return out;
}

std::vector<double> box_mean_parallel(std::span<const double> in, int width, int height,
                                      int radius) {
    std::vector<double> tmp(in.size());
    std::vector<double> out(in.size());
    const double norm = 1.0 / ((2.0 * radius + 1) * (2.0 * radius + 1));
    parallel_for(height, [&](int y) { box_rows(in, tmp, width, y, radius); });
    parallel_for(width, [&](int x) { box_cols(tmp, out, width, height, x, radius, norm); });
    return out;
}

std::vector<double> correlate_layer_serial(std::span<const double> input, int width, int height,
                                           const LayerShape& shape,
                                           std::span<const float> weights,
                                           std::span<const float> bias) {
    const auto padded = pad_all(input, width, height, shape);
    const std::size_t n = static_cast<std::size_t>(width) * height;
    std::vector<double> out(n * shape.out_channels);
    for (int o = 0; o < shape.out_channels; ++o) {
        correlate_output_channel(padded, width, height, shape, weights, bias[o], o, out.data() + o * n);
    }
    return out;
}

std::vector<double> correlate_layer_parallel(std::span<const double> input, int width,
                                             int height, const LayerShape& shape,
                                             std::span<const float> weights,
                                             std::span<const float> bias) {
    const auto padded = pad_all(input, width, height, shape);
    const std::size_t n = static_cast<std::size_t>(width) * height;
    std::vector<double> out(n * shape.out_channels);
    parallel_for(shape.out_channels, [&](int o) {
        correlate_output_channel(padded, width, height, shape, weights, bias[o], o, out.data() + o * n);
    });
    return out;
}

}  // namespace exdeblur::kernels
