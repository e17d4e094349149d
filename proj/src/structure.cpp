#include "exdeblur/structure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "exdeblur/error.hpp"
#include "exdeblur/estimation.hpp"
#include "exdeblur/image_io.hpp"
#include "exdeblur/kernels.hpp"

namespace exdeblur {

ContourMask::ContourMask(int width, int height, std::uint8_t fill)
    : ContourMask(width, height,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                                static_cast<std::size_t>(std::max(height, 0)),
                                            fill)) {}

ContourMask::ContourMask(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width <= 0 || height <= 0) throw DimensionError("mask dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(width) * height) {
        throw DimensionError("mask data length does not match width*height");
    }
    for (auto v : data_) {
        if (v > 1) throw ValueError("mask values must be 0 or 1");
    }
}

ContourMask ContourMask::binarize(const GrayImage& img, double threshold) {
    std::vector<std::uint8_t> d(img.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = img.data()[i] >= threshold ? 1 : 0;
    return {img.width(), img.height(), std::move(d)};
}

std::size_t ContourMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

GrayImage ContourMask::to_image() const {
    return {width_, height_, std::vector<double>(data_.begin(), data_.end())};
}

GrayImage guided_filter(const GrayImage& guide, const GrayImage& input, int radius, double eps) {
    if (!guide.same_shape(input)) throw DimensionError("guided_filter: guide and input sizes differ");
    if (radius < 1) throw ValueError("guided_filter: radius must be >= 1");
    if (!(eps > 0.0)) throw ValueError("guided_filter: eps must be > 0");
    const int w = guide.width();
    const int h = guide.height();
    const std::size_t n = guide.size();
    auto box = [&](std::span<const double> v) { return kernels::box_mean_parallel(v, w, h, radius); };

    const auto I = guide.data();
    const auto p = input.data();
    std::vector<double> ii(n), ip(n);
    for (std::size_t i = 0; i < n; ++i) {
        ii[i] = I[i] * I[i];
        ip[i] = I[i] * p[i];
    }
    const auto mean_i = box(I);
    const auto mean_p = box(p);
    const auto corr_ii = box(ii);
    const auto corr_ip = box(ip);

    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double var_i = corr_ii[i] - mean_i[i] * mean_i[i];
        const double cov_ip = corr_ip[i] - mean_i[i] * mean_p[i];
        a[i] = cov_ip / (var_i + eps);
        b[i] = mean_p[i] - a[i] * mean_i[i];
    }
    const auto mean_a = box(a);
    const auto mean_b = box(b);
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = mean_a[i] * I[i] + mean_b[i];
    return {w, h, std::move(q)};
}

namespace {

// Exact a/b > c/d for positive denominators, without overflow.
bool fraction_greater(unsigned __int128 a, unsigned __int128 b, unsigned __int128 c,
                      unsigned __int128 d) {
    while (true) {
        const auto qa = a / b, qc = c / d;
        if (qa != qc) return qa > qc;
        const auto ra = a % b, rc = c % d;
        if (ra == 0) return false;
        if (rc == 0) return true;
        // ra/b > rc/d  <=>  d/rc > b/ra
        a = d;
        c = b;
        b = rc;
        d = ra;
    }
}

}  // namespace

double otsu_threshold(const GrayImage& img) {
    constexpr int kBins = 256;
    if (img.max() == img.min()) throw DegenerateInputError("otsu_threshold: constant image");
    std::array<long long, kBins> hist{};
    for (double v : img.data()) {
        const int bin = std::clamp(static_cast<int>(std::floor(v * kBins)), 0, kBins - 1);
        ++hist[bin];
    }
    const long long total = static_cast<long long>(img.size());
    long long sum_all = 0;
    for (int t = 0; t < kBins; ++t) sum_all += t * hist[t];

    // Between-class variance is (s0 w1 - s1 w0)^2 / (w0 w1 total^2); it is
    // compared exactly as a fraction so ties always resolve to the lowest bin.
    long long w0 = 0, sum0 = 0;
    unsigned __int128 best_num = 0, best_den = 1;
    int best_t = -1;
    for (int t = 0; t < kBins; ++t) {
        w0 += hist[t];
        sum0 += t * hist[t];
        const long long w1 = total - w0;
        if (w0 == 0 || w1 == 0) continue;
        const __int128 d = static_cast<__int128>(sum0) * w1 - static_cast<__int128>(sum_all - sum0) * w0;
        const auto mag = static_cast<unsigned __int128>(d < 0 ? -d : d);
        const unsigned __int128 num = mag * mag;
        const auto den = static_cast<unsigned __int128>(w0) * static_cast<unsigned __int128>(w1);
        if (best_t < 0 || fraction_greater(num, den, best_num, best_den)) {
            best_num = num;
            best_den = den;
            best_t = t;
        }
    }
    if (best_t < 0) throw DegenerateInputError("otsu_threshold: all values fall in one bin");
    return (best_t + 1) / static_cast<double>(kBins);
}

GradientField gate(const GradientField& g, const ContourMask& mask) {
    if (g.width() != mask.width() || g.height() != mask.height()) {
        throw DimensionError("gate: mask and gradient sizes differ");
    }
    std::vector<double> gx(g.dx.data().begin(), g.dx.data().end());
    std::vector<double> gy(g.dy.data().begin(), g.dy.data().end());
    const auto m = mask.data();
    for (std::size_t i = 0; i < gx.size(); ++i) {
        if (m[i] == 0) gx[i] = gy[i] = 0.0;
    }
    return {GrayImage(g.width(), g.height(), std::move(gx)), GrayImage(g.width(), g.height(), std::move(gy))};
}

std::pair<GradientField, ContourMask> extract_salient_edges(const GrayImage& sharp,
                                                             const ContourMask& initial_mask,
                                                             int radius, double eps) {
    if (sharp.width() != initial_mask.width() || sharp.height() != initial_mask.height()) {
        throw DimensionError("extract_salient_edges: mask and image sizes differ");
    }
    const GrayImage filtered = guided_filter(sharp, initial_mask.to_image(), radius, eps);
    double threshold = 0.0;
    try {
        threshold = otsu_threshold(filtered);
    } catch (const DegenerateInputError&) {
        throw DegenerateInputError("extract_salient_edges: refined mask is degenerate");
    }
    ContourMask refined = ContourMask::binarize(filtered, threshold);
    if (refined.count() == 0 || refined.count() == static_cast<std::size_t>(sharp.size())) {
        throw DegenerateInputError("extract_salient_edges: refined mask is all zero or all one");
    }
    GradientField edges = gate(gradient(sharp), refined);
    return {std::move(edges), std::move(refined)};
}

GrayImage l0_smooth(const GrayImage& img, double lambda_s) {
    if (!(lambda_s > 0.0)) throw ValueError("l0_smooth: lambda_s must be > 0");
    DeblurConfig cfg;
    cfg.lambda = lambda_s;
    cfg.theta = 0.0;
    return solve_latent(img, BlurKernel::delta(1), GradientField::zeros(img.width(), img.height()), cfg);
}

ContourMask rasterize_polygons(std::span<const Polygon> polygons, int width, int height) {
    std::vector<std::uint8_t> d(static_cast<std::size_t>(width) * height, 0);
    for (int y = 0; y < height; ++y) {
        const double py = y + 0.5;
        for (int x = 0; x < width; ++x) {
            const double px = x + 0.5;
            bool inside = false;
            for (const Polygon& poly : polygons) {
                const std::size_t n = poly.size();
                for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
                    const auto [xi, yi] = poly[i];
                    const auto [xj, yj] = poly[j];
                    if ((yi > py) != (yj > py) && px < (xj - xi) * (py - yi) / (yj - yi) + xi) {
                        inside = !inside;
                    }
                }
            }
            d[static_cast<std::size_t>(y) * width + x] = inside ? 1 : 0;
        }
    }
    return {width, height, std::move(d)};
}

namespace {

bool is_polygon_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::string tok;
    return static_cast<bool>(in >> tok) && tok == "POLY";
}

std::vector<Polygon> read_polygons(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<Polygon> polys;
    std::string tag;
    while (in >> tag) {
        if (tag != "POLY") throw FormatError("polygon file: expected POLY, got '" + tag + "'");
        int n = 0;
        if (!(in >> n) || n < 3) throw FormatError("polygon file: a region needs >= 3 vertices");
        Polygon poly(static_cast<std::size_t>(n));
        for (auto& [x, y] : poly) {
            if (!(in >> x >> y)) throw FormatError("polygon file: truncated vertex list");
        }
        polys.push_back(std::move(poly));
    }
    return polys;
}

}  // namespace

ContourMask load_mask(const std::filesystem::path& path, int width, int height) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    if (is_polygon_file(path)) {
        if (width <= 0 || height <= 0) throw DimensionError("polygon masks need a target size");
        const auto polys = read_polygons(path);
        return rasterize_polygons(polys, width, height);
    }
    ContourMask m = ContourMask::binarize(load_image(path), 0.5);
    if ((width > 0 && m.width() != width) || (height > 0 && m.height() != height)) {
        throw DimensionError("mask size does not match the image");
    }
    return m;
}

void save_mask(const ContourMask& mask, const std::filesystem::path& path) {
    save_image(mask.to_image(), path);
}

}  // namespace exdeblur
