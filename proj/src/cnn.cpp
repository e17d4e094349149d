#include "exdeblur/cnn.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "exdeblur/error.hpp"
#include "exdeblur/kernels.hpp"

namespace exdeblur {

namespace {

constexpr std::array<char, 4> kMagic{'E', 'D', 'N', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ostream& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
public:
    Reader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

    std::uint32_t u32() {
        unsigned char b[4];
        read(b, 4);
        return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
               static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
    }
    std::uint8_t u8() {
        unsigned char b;
        read(&b, 1);
        return b;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    void read(unsigned char* dst, std::size_t n) {
        in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError("truncated weight file " + name_);
    }

private:
    std::istream& in_;
    std::string name_;
};

void check_layer(const ConvLayer& l, std::size_t index) {
    const std::string where = "layer " + std::to_string(index) + ": ";
    if (l.in_channels <= 0 || l.out_channels <= 0 || l.kh <= 0 || l.kw <= 0) {
        throw FormatError(where + "non-positive dimension");
    }
    const std::size_t expect = static_cast<std::size_t>(l.out_channels) * l.in_channels * l.kh * l.kw;
    if (l.weights.size() != expect) throw FormatError(where + "weight count mismatch");
    if (l.bias.size() != static_cast<std::size_t>(l.out_channels)) throw FormatError(where + "bias count mismatch");
    auto finite = [](float v) { return std::isfinite(v); };
    if (!std::all_of(l.weights.begin(), l.weights.end(), finite) ||
        !std::all_of(l.bias.begin(), l.bias.end(), finite)) {
        throw ValueError(where + "non-finite parameters");
    }
    if (l.activation != Activation::relu && l.activation != Activation::linear) {
        throw FormatError(where + "unknown activation");
    }
}

using LayerFn = std::vector<double> (*)(std::span<const double>, int, int, const kernels::LayerShape&,
                                        std::span<const float>, std::span<const float>);

std::vector<std::vector<double>> run(const GrayImage& img, const NetworkWeights& w, LayerFn fn) {
    if (w.num_layers() == 0) throw ValueError("network has no layers");
    const ConvLayer& first = w.layers().front();
    if (img.width() < first.kw || img.height() < first.kh) {
        throw DimensionError("image smaller than the first-layer kernel");
    }
    std::vector<std::vector<double>> acts;
    acts.emplace_back(img.data().begin(), img.data().end());
    for (const ConvLayer& l : w.layers()) {
        std::vector<double> out = fn(acts.back(), img.width(), img.height(),
                                     {l.in_channels, l.out_channels, l.kh, l.kw}, l.weights, l.bias);
        if (l.activation == Activation::relu) {
            for (double& v : out) v = std::max(v, 0.0);
        }
        acts.push_back(std::move(out));
    }
    return acts;
}

GrayImage clamp_output(const GrayImage& img, std::vector<double> out) {
    for (double& v : out) v = std::clamp(v, 0.0, kForwardClampMax);
    return {img.width(), img.height(), std::move(out)};
}

}  // namespace

NetworkWeights::NetworkWeights(std::vector<ConvLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw FormatError("network has no layers");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        check_layer(layers_[i], i);
        if (i > 0 && layers_[i - 1].out_channels != layers_[i].in_channels) {
            throw FormatError("layer " + std::to_string(i) + ": channel count incompatible with previous layer");
        }
    }
    if (layers_.front().in_channels != 1) throw FormatError("first layer must take one channel");
    if (layers_.back().out_channels != 1) throw FormatError("last layer must produce one channel");
}

std::vector<LayerSpec> structure_net_architecture() {
    return {{64, 15, 15, Activation::relu}, {64, 1, 1, Activation::relu}, {64, 1, 1, Activation::relu},
            {64, 1, 1, Activation::relu},   {64, 1, 1, Activation::relu}, {1, 1, 1, Activation::linear}};
}

NetworkWeights load_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open weight file " + path.string());
    std::array<char, 4> magic{};
    in.read(magic.data(), 4);
    if (in.gcount() != 4 || magic != kMagic) throw FormatError("bad magic in weight file " + path.string());
    Reader r(in, path.string());
    const std::uint32_t count = r.u32();
    if (count == 0 || count > 4096) throw FormatError("implausible layer count in " + path.string());
    std::vector<ConvLayer> layers(count);
    for (auto& l : layers) {
        l.out_channels = static_cast<int>(r.u32());
        l.in_channels = static_cast<int>(r.u32());
        l.kh = static_cast<int>(r.u32());
        l.kw = static_cast<int>(r.u32());
        const std::uint8_t act = r.u8();
        if (act > 1) throw FormatError("unknown activation code in " + path.string());
        l.activation = static_cast<Activation>(act);
        const std::uint64_t n = static_cast<std::uint64_t>(l.out_channels) * l.in_channels * l.kh * l.kw;
        if (l.out_channels <= 0 || l.in_channels <= 0 || l.kh <= 0 || l.kw <= 0 || n > (1u << 28)) {
            throw FormatError("implausible layer dimensions in " + path.string());
        }
        l.weights.resize(n);
        for (float& v : l.weights) v = r.f32();
        l.bias.resize(static_cast<std::size_t>(l.out_channels));
        for (float& v : l.bias) v = r.f32();
    }
    char extra;
    if (in.read(&extra, 1)) throw FormatError("trailing bytes in weight file " + path.string());
    return NetworkWeights(std::move(layers));
}

void save_weights(const NetworkWeights& w, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write weight file " + path.string());
    out.write(kMagic.data(), 4);
    put_u32(out, static_cast<std::uint32_t>(w.num_layers()));
    for (const ConvLayer& l : w.layers()) {
        put_u32(out, static_cast<std::uint32_t>(l.out_channels));
        put_u32(out, static_cast<std::uint32_t>(l.in_channels));
        put_u32(out, static_cast<std::uint32_t>(l.kh));
        put_u32(out, static_cast<std::uint32_t>(l.kw));
        const auto act = static_cast<char>(l.activation);
        out.write(&act, 1);
        for (float v : l.weights) put_f32(out, v);
        for (float v : l.bias) put_f32(out, v);
    }
    if (!out) throw IoError("failed writing weight file " + path.string());
}

std::vector<std::vector<double>> forward_activations(const GrayImage& img, const NetworkWeights& w) {
    return run(img, w, &kernels::correlate_layer_parallel);
}

GrayImage forward(const GrayImage& img, const NetworkWeights& w) {
    auto acts = run(img, w, &kernels::correlate_layer_parallel);
    return clamp_output(img, std::move(acts.back()));
}

GrayImage forward_serial(const GrayImage& img, const NetworkWeights& w) {
    auto acts = run(img, w, &kernels::correlate_layer_serial);
    return clamp_output(img, std::move(acts.back()));
}

GradientField predict_structure(const GrayImage& blurred, const NetworkWeights& w, double tau_pred) {
    if (tau_pred < 0.0) throw ValueError("tau_pred must be >= 0");
    const GradientField g = gradient(forward(blurred, w));
    if (tau_pred == 0.0) return g;
    std::vector<double> gx(g.dx.data().begin(), g.dx.data().end());
    std::vector<double> gy(g.dy.data().begin(), g.dy.data().end());
    for (std::size_t i = 0; i < gx.size(); ++i) {
        if (gx[i] * gx[i] + gy[i] * gy[i] < tau_pred) gx[i] = gy[i] = 0.0;
    }
    return {GrayImage(g.width(), g.height(), std::move(gx)), GrayImage(g.width(), g.height(), std::move(gy))};
}

}  // namespace exdeblur
