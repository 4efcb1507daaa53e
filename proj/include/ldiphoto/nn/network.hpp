#pragma once

#include <Eigen/Core>

#include <random>
#include <string>
#include <vector>

#include "ldiphoto/ldi.hpp"
#include "ldiphoto/nn/ldi_ops.hpp"
#include "ldiphoto/nn/weights.hpp"

namespace ldiphoto::nn {

enum class LayerKind { PartialConv, Activation, Normalize, Downscale, Upscale, SkipSave, SkipConcat };
enum class ActivationFn { Identity, Relu, LeakyRelu, Sigmoid, Tanh };

struct LayerSpec {
    LayerKind kind = LayerKind::PartialConv;
    std::string name;  // weight prefix for pconv / normalize
    int k = 3;
    int stride = 1;
    int in_channels = 0;
    int out_channels = 0;
    ActivationFn fn = ActivationFn::Relu;
    float slope = 0.2f;  // leaky relu
    int channels = 0;    // normalize
    std::string slot;    // skip_save / skip_concat
};

/// Ordered layer list of a partial-convolution U-Net. Weights are looked up as
/// <name>.weight [out, in, k, k], <name>.bias [out], <name>.scale [C], <name>.shift [C].
struct NetworkSpec {
    int input_channels = 3;
    std::vector<LayerSpec> layers;

    static NetworkSpec from_json(const std::string& text);
    std::string to_json() const;

    /// Checks channel flow, scale balance (every downscale undone before the end) and that each
    /// concat refers to a tensor saved at the same scale. Throws InputError.
    void validate() const;
    int output_channels() const;

    /// Encoder/decoder with `stages` stride-2 convolutions, skip concatenations and a final
    /// projection to `input_channels` outputs.
    static NetworkSpec unet(int input_channels, int width, int stages, int k = 3);
};

/// Kernel for a pconv layer read from the store.
KernelSpec bind_kernel(const LayerSpec& layer, const WeightStore& weights);

/// Gaussian weights (stddev `scale`) for every parameter the network reads.
WeightStore random_weights(const NetworkSpec& net, std::mt19937& rng, float scale = 0.2f);

/// Runs the network on the LDI colors with `known` (1 = known) as the input mask.
/// Input values are the color channels. Non-finite activations raise NumericError naming the layer.
LdiTensor run_unet(const Ldi& ldi, const std::vector<float>& known, const NetworkSpec& net, const WeightStore& weights);

}  // namespace ldiphoto::nn
