#include <doctest.h>

#include <random>

#include "exdeblur/cnn.hpp"
#include "exdeblur/convolve.hpp"
#include "exdeblur/exemplar.hpp"
#include "exdeblur/fixtures.hpp"
#include "exdeblur/kernels.hpp"
#include "oracles.hpp"

using namespace exdeblur;

TEST_CASE("parallel convolution equals its serial twin") {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 5; ++t) {
        const GrayImage img = oracle::random_image(rng, 20 + 7 * t, 15 + 3 * t);
        const BlurKernel k = oracle::random_kernel(rng, 3 + 2 * t);
        const auto a = kernels::convolve_circular_serial(img, k.data(), k.size());
        const auto b = kernels::convolve_circular_parallel(img, k.data(), k.size());
        CHECK(a == b);
        const GrayImage ref = oracle::convolve(img, k);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - ref.data()[i]) <= 1e-12);
        const GrayImage spatial = convolve_circular_spatial(img, k);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(spatial.data()[i] == a[i]);
    }
}

TEST_CASE("parallel box mean equals its serial twin and the window average") {
    std::mt19937_64 rng(2);
    for (int r : {0, 1, 3, 9}) {
        const GrayImage img = oracle::random_image(rng, 17, 12);
        const auto a = kernels::box_mean_serial(img.data(), 17, 12, r);
        const auto b = kernels::box_mean_parallel(img.data(), 17, 12, r);
        CHECK(a == b);
        for (int y = 0; y < 12; ++y)
            for (int x = 0; x < 17; ++x) {
                double s = 0.0;
                for (int dy = -r; dy <= r; ++dy)
                    for (int dx = -r; dx <= r; ++dx) s += img.clamped(x + dx, y + dy);
                CHECK(std::abs(a[static_cast<std::size_t>(y) * 17 + x] - s / ((2 * r + 1) * (2 * r + 1))) <= 1e-12);
            }
    }
}

TEST_CASE("parallel CNN layer equals its serial twin") {
    std::mt19937_64 rng(3);
    const kernels::LayerShape shape{3, 5, 5, 3};
    std::normal_distribution<float> n;
    std::vector<float> w(static_cast<std::size_t>(3 * 5 * 5 * 3)), b(5);
    for (float& v : w) v = n(rng);
    for (float& v : b) v = n(rng);
    std::vector<double> in(3 * 14 * 11);
    std::uniform_real_distribution<double> u;
    for (double& v : in) v = u(rng);
    CHECK(kernels::correlate_layer_serial(in, 14, 11, shape, w, b) == kernels::correlate_layer_parallel(in, 14, 11, shape, w, b));
}

TEST_CASE("parallel matching and forward pass equal the serial paths") {
    std::vector<ExemplarSource> sources;
    for (int id = 0; id < 3; ++id) {
        const auto p = fixtures::face_identity(id);
        sources.push_back({std::to_string(id), fixtures::render_face(p, 40, 40), fixtures::face_mask(p, 40, 40)});
    }
    VariantGrid grid;
    grid.scales = {0.5, 1.0};
    grid.rotations = {-4.0, 0.0, 4.0};
    const ExemplarDB db = build_exemplar_db(sources, grid);
    const GrayImage q = fixtures::render_face(fixtures::face_identity(1, 1), 64, 64);
    const MatchResult a = match_exemplar(q, db), b = match_exemplar_serial(q, db);
    CHECK(a.entry_index == b.entry_index);
    CHECK(a.score == b.score);
    CHECK(a.shift_x == b.shift_x);

    std::mt19937_64 rng(4);
    const NetworkWeights w = oracle::random_network(rng, structure_net_architecture());
    const GrayImage img = oracle::random_image(rng, 24, 20);
    const GrayImage fa = forward(img, w), fb = forward_serial(img, w);
    for (std::size_t i = 0; i < fa.size(); ++i) CHECK(fa.data()[i] == fb.data()[i]);
}
