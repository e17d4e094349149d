#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "exdeblur/image.hpp"

namespace exdeblur {

enum class Activation : std::uint8_t { relu = 0, linear = 1 };

struct ConvLayer {
    int in_channels = 0;
    int out_channels = 0;
    int kh = 0;
    int kw = 0;
    /// [out][in][kh][kw], row-major.
    std::vector<float> weights;
    std::vector<float> bias;
    Activation activation = Activation::relu;
};

/// Single-chain stack of convolution layers. The constructor checks sizes,
/// finiteness and channel compatibility (first input and last output are
/// one channel).
class NetworkWeights {
public:
    NetworkWeights() = default;
    explicit NetworkWeights(std::vector<ConvLayer> layers);

    const std::vector<ConvLayer>& layers() const noexcept { return layers_; }
    std::size_t num_layers() const noexcept { return layers_.size(); }

private:
    std::vector<ConvLayer> layers_;
};

/// Layer geometry of the structure-prediction network: a 15x15 layer with
/// 64 outputs, four 1x1 layers with 64 outputs, a 1x1 layer with 1 output.
struct LayerSpec {
    int out_channels;
    int kh;
    int kw;
    Activation activation;
};
std::vector<LayerSpec> structure_net_architecture();

/// EDN1 binary format: magic, u32 layer count, then per layer u32 out, in,
/// kh, kw, u8 activation, float32 weights, float32 biases (little endian).
NetworkWeights load_weights(const std::filesystem::path& path);
void save_weights(const NetworkWeights& w, const std::filesystem::path& path);

/// Output-range clamp applied after the last layer.
inline constexpr double kForwardClampMax = 1.5;

/// Same-size correlation with replicate padding, bias and activation per
/// layer; output clamped to [0, 1.5]. Throws DimensionError if the image is
/// smaller than the first-layer kernel.
GrayImage forward(const GrayImage& img, const NetworkWeights& w);
GrayImage forward_serial(const GrayImage& img, const NetworkWeights& w);

/// Feature maps after every layer (index 0 = input), before the final
/// clamp. Intended for inspection and tests.
std::vector<std::vector<double>> forward_activations(const GrayImage& img,
                                                     const NetworkWeights& w);

/// Gradient of the network output with weak-edge suppression: pixels whose
/// |grad|^2 is below tau_pred get both components zeroed.
GradientField predict_structure(const GrayImage& blurred, const NetworkWeights& w,
                                double tau_pred = 1e-4);

}  // namespace exdeblur
