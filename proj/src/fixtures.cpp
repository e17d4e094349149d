#include "exdeblur/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "exdeblur/synthesis.hpp"

namespace exdeblur::fixtures {

namespace {

constexpr int kSupersample = 4;

struct Geometry {
    double cx, cy, rx, ry;
    double eye_lx, eye_rx, eye_y, eye_r;
    double mouth_x0, mouth_x1, mouth_y0, mouth_y1;
    double brow_y0, brow_y1, brow_half;
    double nose_x0, nose_x1, nose_y0, nose_y1;
};

Geometry pixels(const FaceParams& p, int w, int h) {
    const double s = std::min(w, h);
    Geometry g{};
    g.cx = p.cx * w;
    g.cy = p.cy * h;
    g.rx = p.rx * s;
    g.ry = p.ry * s;
    g.eye_lx = g.cx - p.eye_dx * s;
    g.eye_rx = g.cx + p.eye_dx * s;
    g.eye_y = g.cy + p.eye_y * s;
    g.eye_r = p.eye_r * s;
    g.mouth_x0 = g.cx - p.mouth_w * s / 2;
    g.mouth_x1 = g.cx + p.mouth_w * s / 2;
    g.mouth_y0 = g.cy + p.mouth_y * s - p.mouth_h * s / 2;
    g.mouth_y1 = g.cy + p.mouth_y * s + p.mouth_h * s / 2;
    g.brow_y1 = g.eye_y - g.eye_r - 0.035 * s;
    g.brow_y0 = g.brow_y1 - 0.018 * s;
    g.brow_half = 0.06 * s;
    g.nose_x0 = g.cx - 0.012 * s;
    g.nose_x1 = g.cx + 0.012 * s;
    g.nose_y0 = g.eye_y + 0.02 * s;
    g.nose_y1 = g.cy + p.mouth_y * s - 0.06 * s;
    return g;
}

bool in_ellipse(const Geometry& g, double x, double y) {
    const double u = (x - g.cx) / g.rx;
    const double v = (y - g.cy) / g.ry;
    return u * u + v * v <= 1.0;
}

bool in_disc(double x, double y, double cx, double cy, double r) {
    return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
}

bool in_rect(double x, double y, double x0, double x1, double y0, double y1) {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
}

double shade(const FaceParams& p, const Geometry& g, double x, double y) {
    if (!in_ellipse(g, x, y)) return p.background;
    if (in_disc(x, y, g.eye_lx, g.eye_y, g.eye_r) || in_disc(x, y, g.eye_rx, g.eye_y, g.eye_r)) {
        return p.feature_level;
    }
    if (in_rect(x, y, g.mouth_x0, g.mouth_x1, g.mouth_y0, g.mouth_y1)) return p.feature_level + 0.1;
    // Eyebrows and nose: present in the image but not part of the mask.
    if (in_rect(x, y, g.eye_lx - g.brow_half, g.eye_lx + g.brow_half, g.brow_y0, g.brow_y1) ||
        in_rect(x, y, g.eye_rx - g.brow_half, g.eye_rx + g.brow_half, g.brow_y0, g.brow_y1)) {
        return p.face_level - 0.25;
    }
    if (in_rect(x, y, g.nose_x0, g.nose_x1, g.nose_y0, g.nose_y1)) return p.face_level - 0.12;
    return p.face_level;
}

double rect_boundary_distance(double x, double y, double x0, double x1, double y0, double y1) {
    const double dx = std::max({x0 - x, 0.0, x - x1});
    const double dy = std::max({y0 - y, 0.0, y - y1});
    if (dx > 0.0 || dy > 0.0) return std::hypot(dx, dy);
    return std::min({x - x0, x1 - x, y - y0, y1 - y});
}

}  // namespace

FaceParams face_identity(int identity, int variation) {
    std::mt19937_64 rng(0x5eedULL + 7919ULL * static_cast<std::uint64_t>(identity));
    auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    FaceParams p;
    p.cx = 0.5 + U(-0.02, 0.02);
    p.cy = 0.5 + U(-0.02, 0.02);
    p.rx = U(0.22, 0.34);
    p.ry = U(0.32, 0.43);
    p.eye_dx = U(0.08, 0.14);
    p.eye_y = U(-0.14, -0.04);
    p.eye_r = U(0.03, 0.06);
    p.mouth_y = U(0.12, 0.22);
    p.mouth_w = U(0.09, 0.19);
    p.mouth_h = U(0.025, 0.04);
    p.face_level = U(0.65, 0.85);
    p.background = U(0.2, 0.4);
    p.texture_seed = 1000ULL * static_cast<std::uint64_t>(identity) + static_cast<std::uint64_t>(variation);
    if (variation != 0) {
        std::mt19937_64 vr(0xabcdULL + 104729ULL * static_cast<std::uint64_t>(identity) +
                           static_cast<std::uint64_t>(variation));
        auto V = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(vr); };
        p.mouth_w *= V(0.85, 1.15);
        p.mouth_h *= V(0.8, 1.3);
        p.eye_r *= V(0.9, 1.1);
        p.background += V(-0.05, 0.05);
        p.face_level += V(-0.03, 0.03);
    }
    return p;
}

GrayImage render_face(const FaceParams& p, int width, int height) {
    const Geometry g = pixels(p, width, height);
    std::mt19937_64 rng(p.texture_seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> d(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int sy = 0; sy < kSupersample; ++sy) {
                for (int sx = 0; sx < kSupersample; ++sx) {
                    acc += shade(p, g, x + (sx + 0.5) / kSupersample, y + (sy + 0.5) / kSupersample);
                }
            }
            const double v = acc / (kSupersample * kSupersample) + p.texture * noise(rng);
            d[static_cast<std::size_t>(y) * width + x] = std::clamp(v, 0.0, 1.0);
        }
    }
    return {width, height, std::move(d)};
}

ContourMask face_mask(const FaceParams& p, int width, int height, double band) {
    const Geometry g = pixels(p, width, height);
    std::vector<std::uint8_t> m(static_cast<std::size_t>(width) * height, 0);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            // Forward differences put an edge's response on the pixel before
            // the step, so measure from the pixel's far corner region center.
            const double px = x + 1.0;
            const double py = y + 1.0;
            bool on = false;
            if (py >= g.cy) {
                const double u = (px - g.cx) / g.rx;
                const double v = (py - g.cy) / g.ry;
                const double f = u * u + v * v - 1.0;
                const double gn = std::hypot(2 * (px - g.cx) / (g.rx * g.rx), 2 * (py - g.cy) / (g.ry * g.ry));
                on = gn > 0 && std::abs(f) / gn <= band;
            }
            for (double ex : {g.eye_lx, g.eye_rx}) {
                on = on || std::abs(std::hypot(px - ex, py - g.eye_y) - g.eye_r) <= band;
            }
            on = on || rect_boundary_distance(px, py, g.mouth_x0, g.mouth_x1, g.mouth_y0, g.mouth_y1) <= band;
            m[static_cast<std::size_t>(y) * width + x] = on ? 1 : 0;
        }
    }
    return {width, height, std::move(m)};
}

namespace {

std::vector<BlurKernel> kernels_from(const std::vector<std::pair<std::uint64_t, int>>& specs) {
    std::vector<BlurKernel> out;
    for (const auto& [seed, size] : specs) {
        TrajectoryParams tp;
        tp.seed = seed;
        out.push_back(synth_kernel(tp, size));
    }
    return out;
}

}  // namespace

std::vector<BlurKernel> suite_kernels() {
    return kernels_from({{11, 13}, {23, 15}, {37, 13}, {41, 15}});
}

std::vector<BlurKernel> matching_kernels() {
    return kernels_from({{101, 13}, {102, 15}, {103, 17}, {104, 19}, {105, 13}, {106, 15}, {107, 17}, {108, 19}});
}

}  // namespace exdeblur::fixtures
