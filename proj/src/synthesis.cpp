#include "exdeblur/synthesis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "exdeblur/convolve.hpp"
#include "exdeblur/error.hpp"

namespace exdeblur {

namespace {

using Vec3 = std::array<double, 3>;

constexpr double kJerkProbability = 0.005;
constexpr double kCentripetal = 0.02;

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    for (;;) {
        Vec3 v{n01(rng), n01(rng), n01(rng)};
        const double n = norm3(v);
        if (n > 1e-12) return {v[0] / n, v[1] / n, v[2] / n};
    }
}

// Velocity random walk with constant speed: Gaussian impulses, occasional
// large jerks and a weak pull toward the start keep the path compact and
// curved.
std::vector<Vec3> random_trajectory(const TrajectoryParams& p) {
    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    const double speed = (p.impulse > 0.0 || p.anxiety > 0.0) ? 1.0 : 0.0;
    Vec3 v = random_unit(rng);
    v[2] *= 0.5;
    const double vn = norm3(v);
    for (double& c : v) c *= speed / vn;

    std::vector<Vec3> pos(static_cast<std::size_t>(p.num_samples), Vec3{0, 0, 0});
    for (int t = 1; t < p.num_samples; ++t) {
        const Vec3& prev = pos[static_cast<std::size_t>(t - 1)];
        Vec3 dv{};
        for (int c = 0; c < 3; ++c) dv[c] = p.impulse * n01(rng) * 8.0 - kCentripetal * p.impulse * prev[c];
        if (u01(rng) < kJerkProbability) {
            const Vec3 j = random_unit(rng);
            for (int c = 0; c < 3; ++c) dv[c] += p.anxiety * 10.0 * j[c];
        }
        for (int c = 0; c < 3; ++c) v[c] += dv[c];
        const double n = norm3(v);
        if (n > 0.0) {
            for (double& c : v) c *= speed / n;
        }
        for (int c = 0; c < 3; ++c) pos[static_cast<std::size_t>(t)][c] = prev[c] + v[c];
    }
    return pos;
}

}  // namespace

BlurKernel synth_kernel(const TrajectoryParams& params, int size) {
    if (size % 2 == 0) throw ValueError("kernel size must be odd");
    if (size < kMinSynthKernelSize || size > kMaxSynthKernelSize) {
        throw ValueError("kernel size must lie in [13, 75]");
    }
    if (params.num_samples < 2) throw ValueError("trajectory needs at least 2 samples");
    if (params.impulse < 0.0 || params.anxiety < 0.0) throw ValueError("magnitudes must be >= 0");
    if (!(params.exposure_fraction > 0.0 && params.exposure_fraction <= 1.0)) {
        throw ValueError("exposure_fraction must lie in (0, 1]");
    }

    std::vector<Vec3> path = random_trajectory(params);
    const auto used = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(params.exposure_fraction * path.size())));
    path.resize(std::min(used, path.size()));

    double minx = path[0][0], maxx = minx, miny = path[0][1], maxy = miny;
    for (const auto& q : path) {
        minx = std::min(minx, q[0]);
        maxx = std::max(maxx, q[0]);
        miny = std::min(miny, q[1]);
        maxy = std::max(maxy, q[1]);
    }
    const double extent = std::max(maxx - minx, maxy - miny);
    // Random fill of the support, derived from the seed so it stays
    // deterministic but independent of the walk itself.
    std::mt19937_64 rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
    const double fill = std::uniform_real_distribution<double>(0.6, 1.0)(rng);
    const double s = extent > 0.0 ? fill * (size - 3) / extent : 0.0;
    const double c = (size - 1) / 2.0;
    const double ox = (minx + maxx) / 2.0;
    const double oy = (miny + maxy) / 2.0;

    std::vector<double> k(static_cast<std::size_t>(size) * size, 0.0);
    auto splat = [&](int x, int y, double w) {
        if (x >= 0 && x < size && y >= 0 && y < size) k[static_cast<std::size_t>(y) * size + x] += w;
    };
    for (const auto& q : path) {
        const double px = c + (q[0] - ox) * s;
        const double py = c + (q[1] - oy) * s;
        const int x0 = static_cast<int>(std::floor(px));
        const int y0 = static_cast<int>(std::floor(py));
        const double fx = px - x0;
        const double fy = py - y0;
        splat(x0, y0, (1 - fx) * (1 - fy));
        splat(x0 + 1, y0, fx * (1 - fy));
        splat(x0, y0 + 1, (1 - fx) * fy);
        splat(x0 + 1, y0 + 1, fx * fy);
    }
    // Drop splat residue below double rounding so the delta case is exact.
    for (double& v : k) {
        if (v < 1e-12) v = 0.0;
    }
    return BlurKernel::normalized(size, std::move(k));
}

GrayImage apply_blur(const GrayImage& img, const BlurKernel& k, double noise_sigma,
                     std::uint64_t seed) {
    if (!(noise_sigma >= 0.0 && noise_sigma <= 0.2)) {
        throw ValueError("noise_sigma must lie in [0, 0.2]");
    }
    std::vector<double> out = convolve_circular(img, k).release();
    if (noise_sigma > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, noise_sigma);
        for (double& v : out) v += noise(rng);
    }
    for (double& v : out) v = std::clamp(v, 0.0, 1.0);
    return {img.width(), img.height(), std::move(out)};
}

}  // namespace exdeblur
