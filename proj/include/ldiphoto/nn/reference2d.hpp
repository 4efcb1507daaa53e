#pragma once

#include <Eigen/Core>

#include <utility>

#include "ldiphoto/image.hpp"
#include "ldiphoto/nn/network.hpp"

namespace ldiphoto::nn {

/// Plain image tensor: C x (width * height), pixel (x, y) at column y * width + x.
struct Tensor2D {
    int width = 0;
    int height = 0;
    Eigen::MatrixXf values;
};

/// Zero-padded partial convolution on a regular grid; stride 2 samples even pixels.
std::pair<Tensor2D, Tensor2D> partial_conv_2d(const Tensor2D& x, const Tensor2D& mask, const KernelSpec& spec);
/// Keeps even rows and columns.
Tensor2D subsample_2d(const Tensor2D& x);
/// Nearest upscale to the given size.
Tensor2D upscale_2d(const Tensor2D& coarse, int width, int height);

/// Reference executor for the same network on an image and a per-pixel known mask.
Tensor2D run_unet_2d(const Imagef& image, const Eigen::RowVectorXf& known, const NetworkSpec& net,
                     const WeightStore& weights);

}  // namespace ldiphoto::nn
