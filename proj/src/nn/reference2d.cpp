#include "ldiphoto/nn/reference2d.hpp"

#include <vector>

#include "executor.hpp"

namespace ldiphoto::nn {

std::pair<Tensor2D, Tensor2D> partial_conv_2d(const Tensor2D& x, const Tensor2D& mask, const KernelSpec& spec) {
    spec.check();
    const int ow = spec.stride == 2 ? (x.width + 1) / 2 : x.width;
    const int oh = spec.stride == 2 ? (x.height + 1) / 2 : x.height;
    const int k = spec.k;
    const int r = k / 2;
    const int kk = k * k;
    Tensor2D out{ow, oh, Eigen::MatrixXf::Zero(spec.out_channels, Eigen::Index(ow) * oh)};
    Tensor2D out_mask{ow, oh, Eigen::MatrixXf::Zero(1, Eigen::Index(ow) * oh)};
    const Eigen::MatrixXd weights = spec.weights.cast<double>();
    const Eigen::VectorXd bias = spec.bias.cast<double>();
    Eigen::VectorXd col(spec.in_channels * kk);
    for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
            const int cx = ox * spec.stride;
            const int cy = oy * spec.stride;
            col.setZero();
            double msum = 0.0;
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    const int px = cx + kx - r;
                    const int py = cy + ky - r;
                    if (px < 0 || py < 0 || px >= x.width || py >= x.height) continue;
                    const Eigen::Index p = Eigen::Index(py) * x.width + px;
                    const float m = mask.values(0, p);
                    msum += m;
                    if (m == 0.0f) continue;
                    for (int i = 0; i < spec.in_channels; ++i) col(i * kk + ky * k + kx) = double(x.values(i, p)) * m;
                }
            if (msum > 0.0) {
                const Eigen::Index o = Eigen::Index(oy) * ow + ox;
                out.values.col(o) = ((weights * col) * (double(kk) / msum) + bias).cast<float>();
                out_mask.values(0, o) = 1.0f;
            }
        }
    return {std::move(out), std::move(out_mask)};
}

Tensor2D subsample_2d(const Tensor2D& x) {
    const int w = (x.width + 1) / 2;
    const int h = (x.height + 1) / 2;
    Tensor2D out{w, h, Eigen::MatrixXf(x.values.rows(), Eigen::Index(w) * h)};
    for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx)
            out.values.col(Eigen::Index(y) * w + xx) = x.values.col(Eigen::Index(2 * y) * x.width + 2 * xx);
    return out;
}

Tensor2D upscale_2d(const Tensor2D& coarse, int width, int height) {
    Tensor2D out{width, height, Eigen::MatrixXf(coarse.values.rows(), Eigen::Index(width) * height)};
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            out.values.col(Eigen::Index(y) * width + x) = coarse.values.col(Eigen::Index(y / 2) * coarse.width + x / 2);
    return out;
}

namespace {

class GridBackend {
public:
    std::pair<Tensor2D, Tensor2D> conv(const Tensor2D& x, const Tensor2D& m, const KernelSpec& spec) {
        if (spec.stride == 2) sizes_.push_back({x.width, x.height});
        return partial_conv_2d(x, m, spec);
    }
    std::pair<Tensor2D, Tensor2D> downscale(const Tensor2D& x, const Tensor2D& m) {
        sizes_.push_back({x.width, x.height});
        return {subsample_2d(x), subsample_2d(m)};
    }
    std::pair<Tensor2D, Tensor2D> upscale(const Tensor2D& x, const Tensor2D& m) {
        const auto [w, h] = sizes_.back();
        sizes_.pop_back();
        return {upscale_2d(x, w, h), upscale_2d(m, w, h)};
    }
    Tensor2D concat(const Tensor2D& a, const Tensor2D& b) {
        Tensor2D out{a.width, a.height, Eigen::MatrixXf(a.values.rows() + b.values.rows(), a.values.cols())};
        out.values << a.values, b.values;
        return out;
    }

private:
    std::vector<std::pair<int, int>> sizes_;
};

}  // namespace

Tensor2D run_unet_2d(const Imagef& image, const Eigen::RowVectorXf& known, const NetworkSpec& net,
                     const WeightStore& weights) {
    if (image.channels() != net.input_channels) throw InputError("image channel count does not match the network");
    if (known.size() != image.pixel_count()) throw InputError("mask length does not match the image");
    Tensor2D x{image.width(), image.height(), image.data()};
    Tensor2D m{image.width(), image.height(), known};
    GridBackend backend;
    return detail::execute(backend, std::move(x), std::move(m), net, weights);
}

}  // namespace ldiphoto::nn
