#include <doctest.h>

#include <cmath>
#include <random>

#include "exdeblur/convolve.hpp"
#include "exdeblur/error.hpp"
#include "exdeblur/fixtures.hpp"
#include "exdeblur/metrics.hpp"
#include "exdeblur/restoration.hpp"
#include "exdeblur/synthesis.hpp"
#include "oracles.hpp"

using namespace exdeblur;

TEST_CASE("delta kernel with a vanishing prior returns the input") {
    std::mt19937_64 rng(1);
    const GrayImage B = oracle::random_image(rng, 24, 20);
    RestoreConfig cfg;
    cfg.mu = 1e-8;
    const GrayImage out = deconv_hyperlaplacian(B, BlurKernel::delta(3), cfg);
    for (std::size_t i = 0; i < B.size(); ++i) CHECK(std::abs(out.data()[i] - B.data()[i]) <= 1e-4);
}

TEST_CASE("true-kernel restoration gains at least 3 dB on the fixture suite") {
    const GrayImage sharp = fixtures::render_face(fixtures::face_identity(0), 128, 128);
    for (const BlurKernel& k : fixtures::suite_kernels()) {
        const GrayImage B = convolve_circular(sharp, k);
        const GrayImage out = deconv_hyperlaplacian(B, k);
        CHECK(psnr(out, sharp) >= psnr(B, sharp) + 3.0);
    }
}

TEST_CASE("IRLS objective is non-increasing and the output is in range") {
    std::mt19937_64 rng(2);
    const GrayImage sharp = fixtures::render_face(fixtures::face_identity(1), 64, 64);
    for (int t = 0; t < 3; ++t) {
        const BlurKernel k = oracle::random_kernel(rng, 7);
        const GrayImage B = apply_blur(sharp, k, 0.01 * t, 5);
        RestoreTrace trace;
        RestoreConfig cfg;
        const GrayImage out = deconv_hyperlaplacian(B, k, cfg, &trace);
        REQUIRE(trace.objective.size() == static_cast<std::size_t>(cfg.irls_iters) + 1);
        for (std::size_t i = 1; i < trace.objective.size(); ++i) CHECK(trace.objective[i] <= trace.objective[i - 1] + 1e-9);
        for (double v : out.data()) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("hyperlaplacian_objective matches its definition") {
    std::mt19937_64 rng(3);
    const GrayImage B = oracle::random_image(rng, 9, 8), I = oracle::random_image(rng, 9, 8);
    const BlurKernel k = oracle::random_kernel(rng, 3);
    RestoreConfig cfg;
    const GradientField g = oracle::gradient(I);
    double prior = 0.0;
    for (std::size_t i = 0; i < I.size(); ++i)
        prior += std::pow(g.dx.data()[i] * g.dx.data()[i] + g.dy.data()[i] * g.dy.data()[i] + cfg.irls_epsilon, cfg.hl_exponent / 2.0);
    const double expected = squared_distance(oracle::convolve(I, k), B) + cfg.mu * prior;
    CHECK(hyperlaplacian_objective(B, k, I, cfg) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("restoration config is validated") {
    RestoreConfig cfg;
    cfg.hl_exponent = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValueError);
    RestoreConfig c2;
    c2.mu = -1.0;
    CHECK_THROWS_AS(deconv_hyperlaplacian(GrayImage(8, 8, 0.5), BlurKernel::delta(3), c2), ValueError);
}
