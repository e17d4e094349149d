// Writes the hand-built fixture network used by the cnn-mode tests. The
// first channel carries an unsharp-masked copy of the input through every
// layer; the remaining channels hold small seeded weights that never reach
// the output.

#include <cmath>
#include <cstdio>
#include <random>

#include "exdeblur/cnn.hpp"

using namespace exdeblur;

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s OUT.edn1\n", argv[0]);
        return 2;
    }
    std::mt19937 rng(20240611u);
    std::normal_distribution<float> noise(0.0f, 0.01f);

    std::vector<ConvLayer> layers;
    int in = 1;
    for (const LayerSpec& spec : structure_net_architecture()) {
        ConvLayer l;
        l.in_channels = in;
        l.out_channels = spec.out_channels;
        l.kh = spec.kh;
        l.kw = spec.kw;
        l.activation = spec.activation;
        const std::size_t taps = static_cast<std::size_t>(l.kh) * l.kw;
        l.weights.assign(static_cast<std::size_t>(l.out_channels) * in * taps, 0.0f);
        l.bias.assign(static_cast<std::size_t>(l.out_channels), 0.0f);
        for (int o = 1; o < l.out_channels; ++o)
            for (std::size_t j = 0; j < static_cast<std::size_t>(in) * taps; ++j)
                l.weights[static_cast<std::size_t>(o) * in * taps + j] = noise(rng);
        if (layers.empty()) {
            // 2 delta - gaussian(sigma 1.5): unit DC gain, mild sharpening.
            const int cy = l.kh / 2, cx = l.kw / 2;
            double total = 0.0;
            std::vector<double> g(taps);
            for (int a = 0; a < l.kh; ++a)
                for (int b = 0; b < l.kw; ++b) {
                    const double r2 = (a - cy) * (a - cy) + (b - cx) * (b - cx);
                    g[static_cast<std::size_t>(a) * l.kw + b] = std::exp(-r2 / (2.0 * 1.5 * 1.5));
                    total += g[static_cast<std::size_t>(a) * l.kw + b];
                }
            for (std::size_t j = 0; j < taps; ++j) l.weights[j] = static_cast<float>(-g[j] / total);
            l.weights[static_cast<std::size_t>(cy) * l.kw + cx] += 2.0f;
        } else {
            for (int i = 0; i < in; ++i) l.weights[static_cast<std::size_t>(i)] = 0.0f;
            l.weights[0] = 1.0f;
        }
        layers.push_back(std::move(l));
        in = spec.out_channels;
    }
    save_weights(NetworkWeights(std::move(layers)), argv[1]);
    return 0;
}
