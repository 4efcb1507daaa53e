#pragma once

// Layer loop shared by the LDI executor and the 2D reference executor.

#include <cmath>
#include <map>
#include <string>

#include "ldiphoto/error.hpp"
#include "ldiphoto/nn/network.hpp"

namespace ldiphoto::nn::detail {

inline void apply_activation(Eigen::MatrixXf& v, const LayerSpec& l) {
    switch (l.fn) {
        case ActivationFn::Identity: break;
        case ActivationFn::Relu: v = v.cwiseMax(0.0f); break;
        case ActivationFn::LeakyRelu: v = v.unaryExpr([s = l.slope](float a) { return a > 0 ? a : a * s; }); break;
        case ActivationFn::Sigmoid: v = v.unaryExpr([](float a) { return 1.0f / (1.0f + std::exp(-a)); }); break;
        case ActivationFn::Tanh: v = v.array().tanh().matrix(); break;
    }
}

inline void apply_normalize(Eigen::MatrixXf& v, const LayerSpec& l, const WeightStore& weights) {
    const auto c = std::uint32_t(l.channels);
    const auto& scale = weights.get(l.name + ".scale", {c}).data;
    const auto& shift = weights.get(l.name + ".shift", {c}).data;
    for (Eigen::Index i = 0; i < v.rows(); ++i) v.row(i) = (v.row(i).array() * scale[std::size_t(i)] + shift[std::size_t(i)]).matrix();
}

/// Backend requirements:
///   Tensor with Eigen::MatrixXf `values` (C x N)
///   conv(x, m, KernelSpec) -> pair<Tensor, Tensor>, downscale(x, m) -> pair, upscale(x, m) -> pair
///   concat(a, b) -> Tensor (same scale)
template <typename Backend, typename Tensor>
Tensor execute(Backend& backend, Tensor x, Tensor m, const NetworkSpec& net, const WeightStore& weights) {
    net.validate();
    std::map<std::string, std::pair<Tensor, Tensor>> saved;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const LayerSpec& l = net.layers[i];
        switch (l.kind) {
            case LayerKind::PartialConv: std::tie(x, m) = backend.conv(x, m, bind_kernel(l, weights)); break;
            case LayerKind::Activation: apply_activation(x.values, l); break;
            case LayerKind::Normalize: apply_normalize(x.values, l, weights); break;
            case LayerKind::Downscale: std::tie(x, m) = backend.downscale(x, m); break;
            case LayerKind::Upscale: std::tie(x, m) = backend.upscale(x, m); break;
            case LayerKind::SkipSave: saved.insert_or_assign(l.slot, std::pair{x, m}); break;
            case LayerKind::SkipConcat: {
                const auto& [sx, sm] = saved.at(l.slot);
                x = backend.concat(x, sx);
                m.values = m.values.cwiseMax(sm.values);
                break;
            }
        }
        if (!x.values.allFinite())
            throw NumericError("non-finite activation after layer " + std::to_string(i) + (l.name.empty() ? "" : " (" + l.name + ")"));
    }
    return x;
}

}  // namespace ldiphoto::nn::detail
