#include "ldiphoto/nn/selftest.hpp"

#include <cstdio>
#include <random>

#include "ldiphoto/ldi.hpp"
#include "ldiphoto/nn/ldi_ops.hpp"
#include "ldiphoto/nn/network.hpp"
#include "ldiphoto/nn/reference2d.hpp"

namespace ldiphoto::nn {

std::string SelftestResult::summary() const {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%d cases: conv %.3g, downscale %.3g, upscale %.3g, network %.3g -> %s", cases, conv_error,
                  downscale_error, upscale_error, network_error, passed ? "PASS" : "FAIL");
    return buf;
}

SelftestResult equivalence_selftest(int cases, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> side(8, 64), chans(1, 8), pick(0, 2), coin(0, 1);
    std::uniform_real_distribution<float> val(0.0f, 1.0f);
    SelftestResult r;
    for (int c = 0; c < cases; ++c) {
        const int w = side(rng), h = side(rng), C = chans(rng), k = 3 + 2 * pick(rng), stride = 1 + coin(rng);
        Imagef image(w, h, C);
        image.data() = Eigen::MatrixXf::NullaryExpr(C, Eigen::Index(w) * h, [&] { return val(rng); });
        const Ldi ldi = lift_to_ldi(image, DisparityImage::constant(w, h, 0.5f), 0.05f);
        const GraphPtr graph = LdiGraph::from(ldi);

        Eigen::RowVectorXf known(Eigen::Index(w) * h);
        for (Eigen::Index i = 0; i < known.size(); ++i) known[i] = val(rng) < 0.7f ? 1.0f : 0.0f;

        KernelSpec spec(k, stride, C, 1 + pick(rng) * 3);
        spec.weights = KernelSpec::Weights::NullaryExpr(spec.out_channels, C * k * k, [&] { return val(rng) - 0.5f; });
        spec.bias = Eigen::VectorXf::NullaryExpr(spec.out_channels, [&] { return val(rng) - 0.5f; });

        const LdiTensor x(graph, image.data());
        const LdiTensor m(graph, Eigen::MatrixXf(known));
        const ScaleMap map = ldi_downscale(graph);
        const ConvResult got = ldi_partial_conv(x, m, spec, stride == 2 ? &map : nullptr);
        const auto [want_v, want_m] = partial_conv_2d({w, h, image.data()}, {w, h, Eigen::MatrixXf(known)}, spec);
        // LDI output follows pixel ids; the 2D grid is scanline, so map through positions
        for (int i = 0; i < got.values.size(); ++i) {
            const int fine = stride == 2 ? map.retained[std::size_t(i)] : i;
            const int gx = ldi.x(fine) / stride, gy = ldi.y(fine) / stride;
            const Eigen::Index g = Eigen::Index(gy) * want_v.width + gx;
            r.conv_error = std::max(r.conv_error, double((got.values.values.col(i) - want_v.values.col(g)).cwiseAbs().maxCoeff()));
            r.conv_error = std::max(r.conv_error, double(std::abs(got.mask.values(0, i) - want_m.values(0, g))));
        }

        const LdiTensor coarse = ldi_subsample(x, map);
        const Tensor2D sub = subsample_2d({w, h, image.data()});
        for (int i = 0; i < coarse.size(); ++i) {
            const int fine = map.retained[std::size_t(i)];
            const Eigen::Index g = Eigen::Index(ldi.y(fine) / 2) * sub.width + ldi.x(fine) / 2;
            r.downscale_error = std::max(r.downscale_error, double((coarse.values.col(i) - sub.values.col(g)).cwiseAbs().maxCoeff()));
        }
        const LdiTensor up = ldi_upscale(coarse, map);
        const Tensor2D up2 = upscale_2d(sub, w, h);
        r.upscale_error = std::max(r.upscale_error, double((up.values - up2.values).cwiseAbs().maxCoeff()));

        if (c % 4 == 0) {
            const NetworkSpec net = NetworkSpec::unet(C, 4, 2, k);
            const WeightStore weights = random_weights(net, rng, 0.2f);
            const std::vector<float> kv(known.data(), known.data() + known.size());
            const LdiTensor a = run_unet(ldi, kv, net, weights);
            const Tensor2D b = run_unet_2d(image, known, net, weights);
            r.network_error = std::max(r.network_error, double((a.values - b.values).cwiseAbs().maxCoeff()));
        }
        ++r.cases;
    }
    r.passed = r.conv_error <= 1e-5 && r.downscale_error <= 1e-5 && r.upscale_error <= 1e-5 && r.network_error <= 1e-4;
    return r;
}

}  // namespace ldiphoto::nn
