#pragma once
// Independent reference implementations for the tests: nested loops and
// dense linear algebra, no FFTs.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "exdeblur/cnn.hpp"
#include "exdeblur/image.hpp"
#include "exdeblur/kernel.hpp"

namespace oracle {

using exdeblur::BlurKernel;
using exdeblur::GradientField;
using exdeblur::GrayImage;

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

inline GrayImage random_image(std::mt19937_64& rng, int w, int h, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> d(static_cast<std::size_t>(w) * h);
    for (double& v : d) v = u(rng);
    return {w, h, std::move(d)};
}

inline BlurKernel random_kernel(std::mt19937_64& rng, int size) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> d(static_cast<std::size_t>(size) * size);
    for (double& v : d) v = u(rng);
    return BlurKernel::normalized(size, std::move(d));
}

// out(x,y) = sum_{a,b} k(a,b) img(x - a + r, y - b + r), periodic.
inline GrayImage convolve(const GrayImage& img, std::span<const double> taps, int ks) {
    const int w = img.width(), h = img.height(), r = ks / 2;
    std::vector<double> out(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int b = 0; b < ks; ++b)
                for (int a = 0; a < ks; ++a)
                    acc += taps[static_cast<std::size_t>(b) * ks + a] *
                           img(wrap(x - a + r, w), wrap(y - b + r, h));
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
    return {w, h, std::move(out)};
}

inline GrayImage convolve(const GrayImage& img, const BlurKernel& k) {
    return convolve(img, k.data(), k.size());
}

inline GradientField gradient(const GrayImage& img) {
    const int w = img.width(), h = img.height();
    std::vector<double> gx(img.size()), gy(img.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            // correlation with [-1, 1]
            gx[static_cast<std::size_t>(y) * w + x] = -img(x, y) + img(wrap(x + 1, w), y);
            gy[static_cast<std::size_t>(y) * w + x] = -img(x, y) + img(x, wrap(y + 1, h));
        }
    return {GrayImage(w, h, std::move(gx)), GrayImage(w, h, std::move(gy))};
}

// Dense matrices acting on row-major pixel vectors.
inline Eigen::MatrixXd convolution_matrix(const BlurKernel& k, int w, int h) {
    const int n = w * h, ks = k.size(), r = ks / 2;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int b = 0; b < ks; ++b)
                for (int a = 0; a < ks; ++a)
                    m(y * w + x, wrap(y - b + r, h) * w + wrap(x - a + r, w)) += k(a, b);
    return m;
}

inline Eigen::MatrixXd dx_matrix(int w, int h) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(w * h, w * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            m(y * w + x, y * w + x) -= 1.0;
            m(y * w + x, y * w + wrap(x + 1, w)) += 1.0;
        }
    return m;
}

inline Eigen::MatrixXd dy_matrix(int w, int h) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(w * h, w * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            m(y * w + x, y * w + x) -= 1.0;
            m(y * w + x, wrap(y + 1, h) * w + x) += 1.0;
        }
    return m;
}

inline Eigen::VectorXd vec(const GrayImage& img) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(img.size()));
    for (std::size_t i = 0; i < img.size(); ++i) v(static_cast<Eigen::Index>(i)) = img.data()[i];
    return v;
}

// Minimizer of ||K I - B||^2 + beta ||w - D I||^2 + theta ||D I - S||^2 via
// the dense normal equations.
inline Eigen::VectorXd dense_latent_step(const GrayImage& B, const BlurKernel& k, const GradientField& wf,
                                         const GradientField& s, double beta, double theta) {
    const int w = B.width(), h = B.height();
    const Eigen::MatrixXd K = convolution_matrix(k, w, h);
    const Eigen::MatrixXd Dx = dx_matrix(w, h), Dy = dy_matrix(w, h);
    const Eigen::MatrixXd A =
        K.transpose() * K + (beta + theta) * (Dx.transpose() * Dx + Dy.transpose() * Dy);
    const Eigen::VectorXd rhs = K.transpose() * vec(B) +
                                Dx.transpose() * (beta * vec(wf.dx) + theta * vec(s.dx)) +
                                Dy.transpose() * (beta * vec(wf.dy) + theta * vec(s.dy));
    return A.fullPivLu().solve(rhs);
}

// Maps a size x size kernel to both channels of s convolved with it.
inline Eigen::MatrixXd kernel_design_matrix(const GradientField& s, int size) {
    const int w = s.width(), h = s.height(), r = size / 2, n = w * h;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * n, size * size);
    for (int c = 0; c < 2; ++c) {
        const GrayImage& ch = c == 0 ? s.dx : s.dy;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int b = 0; b < size; ++b)
                    for (int a = 0; a < size; ++a)
                        H(c * n + y * w + x, b * size + a) = ch(wrap(x - a + r, w), wrap(y - b + r, h));
    }
    return H;
}

inline Eigen::VectorXd dense_kernel_ridge(const GradientField& s, const GradientField& bg, int size,
                                          double gamma) {
    const Eigen::MatrixXd H = kernel_design_matrix(s, size);
    Eigen::VectorXd b(2 * static_cast<Eigen::Index>(bg.dx.size()));
    b << vec(bg.dx), vec(bg.dy);
    const Eigen::MatrixXd A =
        H.transpose() * H + gamma * Eigen::MatrixXd::Identity(size * size, size * size);
    return A.ldlt().solve(H.transpose() * b);
}

// Exhaustive Otsu over 256 bins of [0,1] in exact integer arithmetic:
// first bin t maximizing the between-class variance of {bin <= t} vs
// {bin > t}; returns (t+1)/256.
inline double otsu(const GrayImage& img) {
    std::vector<long long> hist(256, 0);
    for (double v : img.data())
        hist[static_cast<std::size_t>(std::clamp(static_cast<int>(std::floor(v * 256.0)), 0, 255))]++;
    // between ~ (s0 w1 - s1 w0)^2 / (w0 w1); compare as cross products.
    __int128 best_num = -1, best_den = 1;
    int best_t = 0;
    for (int t = 0; t < 255; ++t) {
        long long w0 = 0, s0 = 0, w1 = 0, s1 = 0;
        for (int i = 0; i < 256; ++i) {
            const long long c = hist[static_cast<std::size_t>(i)];
            if (i <= t) {
                w0 += c;
                s0 += c * i;
            } else {
                w1 += c;
                s1 += c * i;
            }
        }
        if (w0 == 0 || w1 == 0) continue;
        const __int128 d = static_cast<__int128>(s0) * w1 - static_cast<__int128>(s1) * w0;
        const __int128 num = d * d, den = static_cast<__int128>(w0) * w1;
        if (best_num < 0 || num * best_den > best_num * den) {
            best_num = num;
            best_den = den;
            best_t = t;
        }
    }
    return (best_t + 1) / 256.0;
}

// Max over all integer shifts of <a, shift(b)> / (|a| |b|), zero padded.
inline double kernel_similarity(const BlurKernel& a, const BlurKernel& b) {
    const int na = a.size(), nb = b.size();
    double best = -std::numeric_limits<double>::infinity();
    double ea = 0, eb = 0;
    for (double v : a.data()) ea += v * v;
    for (double v : b.data()) eb += v * v;
    const int ca = na / 2, cb = nb / 2;
    for (int sy = -(na + nb); sy <= na + nb; ++sy)
        for (int sx = -(na + nb); sx <= na + nb; ++sx) {
            double acc = 0.0;
            for (int y = 0; y < na; ++y)
                for (int x = 0; x < na; ++x) {
                    const int bx = x - ca + cb + sx, by = y - ca + cb + sy;
                    if (bx < 0 || by < 0 || bx >= nb || by >= nb) continue;
                    acc += a(x, y) * b(bx, by);
                }
            best = std::max(best, acc);
        }
    return best / std::sqrt(ea * eb);
}

// Exhaustive gradient NCC over placements of e inside q.
struct Ncc {
    double score;
    int sx, sy;
};
inline Ncc ncc(const GradientField& q, const GradientField& e, bool windowed) {
    double ee = 0.0, qq = 0.0;
    for (std::size_t i = 0; i < e.dx.size(); ++i) ee += e.dx.data()[i] * e.dx.data()[i] + e.dy.data()[i] * e.dy.data()[i];
    for (std::size_t i = 0; i < q.dx.size(); ++i) qq += q.dx.data()[i] * q.dx.data()[i] + q.dy.data()[i] * q.dy.data()[i];
    Ncc best{-std::numeric_limits<double>::infinity(), 0, 0};
    for (int ty = 0; ty + e.height() <= q.height(); ++ty)
        for (int tx = 0; tx + e.width() <= q.width(); ++tx) {
            double dot = 0.0, win = 0.0;
            for (int y = 0; y < e.height(); ++y)
                for (int x = 0; x < e.width(); ++x) {
                    dot += q.dx(tx + x, ty + y) * e.dx(x, y) + q.dy(tx + x, ty + y) * e.dy(x, y);
                    win += q.dx(tx + x, ty + y) * q.dx(tx + x, ty + y) + q.dy(tx + x, ty + y) * q.dy(tx + x, ty + y);
                }
            const double norm = windowed ? win : qq;
            const double s = norm > 0 ? dot / std::sqrt(ee * norm) : 0.0;
            if (s > best.score) best = {s, tx, ty};
        }
    return best;
}

// Naive forward pass: replicate padding, relu/linear, clamp to [0, 1.5].
inline std::vector<double> cnn_forward(const GrayImage& img, const exdeblur::NetworkWeights& net) {
    const int w = img.width(), h = img.height();
    std::vector<std::vector<double>> maps{std::vector<double>(img.data().begin(), img.data().end())};
    for (const auto& l : net.layers()) {
        std::vector<std::vector<double>> next(static_cast<std::size_t>(l.out_channels),
                                              std::vector<double>(static_cast<std::size_t>(w) * h));
        for (int o = 0; o < l.out_channels; ++o)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    double acc = l.bias[static_cast<std::size_t>(o)];
                    for (int i = 0; i < l.in_channels; ++i)
                        for (int a = 0; a < l.kh; ++a)
                            for (int b = 0; b < l.kw; ++b) {
                                const int yy = std::clamp(y + a - l.kh / 2, 0, h - 1);
                                const int xx = std::clamp(x + b - l.kw / 2, 0, w - 1);
                                const std::size_t wi =
                                    ((static_cast<std::size_t>(o) * l.in_channels + i) * l.kh + a) * l.kw + b;
                                acc += static_cast<double>(l.weights[wi]) *
                                       maps[static_cast<std::size_t>(i)][static_cast<std::size_t>(yy) * w + xx];
                            }
                    if (l.activation == exdeblur::Activation::relu) acc = std::max(acc, 0.0);
                    next[static_cast<std::size_t>(o)][static_cast<std::size_t>(y) * w + x] = acc;
                }
        maps = std::move(next);
    }
    for (double& v : maps[0]) v = std::clamp(v, 0.0, exdeblur::kForwardClampMax);
    return maps[0];
}

inline exdeblur::NetworkWeights random_network(std::mt19937_64& rng, const std::vector<exdeblur::LayerSpec>& specs,
                                               float scale = 0.1f) {
    std::normal_distribution<float> n(0.0f, 1.0f);
    std::vector<exdeblur::ConvLayer> layers;
    int in = 1;
    for (const auto& s : specs) {
        exdeblur::ConvLayer l;
        l.in_channels = in;
        l.out_channels = s.out_channels;
        l.kh = s.kh;
        l.kw = s.kw;
        l.activation = s.activation;
        const float fan = scale / std::sqrt(static_cast<float>(in * s.kh * s.kw));
        l.weights.resize(static_cast<std::size_t>(s.out_channels) * in * s.kh * s.kw);
        for (float& v : l.weights) v = n(rng) * fan * 10.0f;
        l.bias.resize(static_cast<std::size_t>(s.out_channels));
        for (float& v : l.bias) v = n(rng) * 0.05f;
        layers.push_back(std::move(l));
        in = s.out_channels;
    }
    return exdeblur::NetworkWeights(std::move(layers));
}

}  // namespace oracle
