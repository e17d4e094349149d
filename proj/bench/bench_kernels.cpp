#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "exdeblur/cnn.hpp"
#include "exdeblur/exemplar.hpp"
#include "exdeblur/fixtures.hpp"
#include "exdeblur/kernels.hpp"
#include "exdeblur/synthesis.hpp"

using namespace exdeblur;

namespace {

GrayImage noise_image(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u;
    std::vector<double> d(static_cast<std::size_t>(w) * h);
    for (double& v : d) v = u(rng);
    return GrayImage(w, h, std::move(d));
}

std::vector<double> box_taps(int n) { return std::vector<double>(static_cast<std::size_t>(n) * n, 1.0 / (n * n)); }

void convolution(benchmark::State& state, bool parallel) {
    const GrayImage img = noise_image(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 1);
    const std::vector<double> taps = box_taps(15);
    for (auto _ : state) {
        auto out = parallel ? kernels::convolve_circular_parallel(img, taps, 15) : kernels::convolve_circular_serial(img, taps, 15);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.size()));
}

void box_mean(benchmark::State& state, bool parallel) {
    const int n = static_cast<int>(state.range(0));
    const GrayImage img = noise_image(n, n, 2);
    for (auto _ : state) {
        auto out = parallel ? kernels::box_mean_parallel(img.data(), n, n, 8) : kernels::box_mean_serial(img.data(), n, n, 8);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(img.size()));
}

void cnn_layer(benchmark::State& state, bool parallel) {
    const int n = static_cast<int>(state.range(0));
    const kernels::LayerShape shape{64, 64, 3, 3};
    std::mt19937_64 rng(3);
    std::normal_distribution<float> g(0.0f, 0.05f);
    std::vector<float> w(static_cast<std::size_t>(64 * 64 * 9)), b(64);
    for (float& v : w) v = g(rng);
    for (float& v : b) v = g(rng);
    std::vector<double> in(static_cast<std::size_t>(64) * n * n);
    std::uniform_real_distribution<double> u;
    for (double& v : in) v = u(rng);
    for (auto _ : state) {
        auto out = parallel ? kernels::correlate_layer_parallel(in, n, n, shape, w, b)
                            : kernels::correlate_layer_serial(in, n, n, shape, w, b);
        benchmark::DoNotOptimize(out.data());
    }
}

const ExemplarDB& bench_db() {
    static const ExemplarDB db = [] {
        std::vector<ExemplarSource> sources;
        for (int id = 0; id < 4; ++id) {
            const auto p = fixtures::face_identity(id);
            sources.push_back({std::to_string(id), fixtures::render_face(p, 96, 96), fixtures::face_mask(p, 96, 96)});
        }
        VariantGrid grid;
        grid.scales = {0.5, 1.0};
        return build_exemplar_db(sources, grid);
    }();
    return db;
}

void exemplar_match(benchmark::State& state, bool parallel) {
    const GrayImage q =
        apply_blur(fixtures::render_face(fixtures::face_identity(1, 1), 128, 128), fixtures::matching_kernels()[0], 0.01, 4);
    const ExemplarDB& db = bench_db();
    for (auto _ : state) {
        const MatchResult m = parallel ? match_exemplar(q, db) : match_exemplar_serial(q, db);
        benchmark::DoNotOptimize(m.score);
    }
}

}  // namespace

BENCHMARK_CAPTURE(convolution, serial, false)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(convolution, parallel, true)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(box_mean, serial, false)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(box_mean, parallel, true)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(cnn_layer, serial, false)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(cnn_layer, parallel, true)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(exemplar_match, serial, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(exemplar_match, parallel, true)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
