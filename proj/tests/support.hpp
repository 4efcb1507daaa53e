#pragma once

#include <random>
#include <vector>

#include "ldiphoto/image.hpp"
#include "ldiphoto/ldi.hpp"

namespace testing {

using namespace ldiphoto;

inline Imagef random_image(int w, int h, std::mt19937& rng, int channels = 3) {
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Imagef img(w, h, channels);
    for (Eigen::Index i = 0; i < img.data().size(); ++i) img.data().data()[i] = u(rng);
    return img;
}

inline DisparityImage random_disparity(int w, int h, std::mt19937& rng, float lo = 0.0f, float hi = 1.0f) {
    std::uniform_real_distribution<float> u(lo, hi);
    DisparityImage::Array a(h, w);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
    return DisparityImage(a);
}

/// Piecewise-constant disparity from a few random axis-aligned blocks over a background.
inline DisparityImage random_blocks(int w, int h, std::mt19937& rng, int blocks = 4) {
    std::uniform_int_distribution<int> ux(0, w - 1), uy(0, h - 1);
    std::uniform_real_distribution<float> ud(0.1f, 0.9f);
    DisparityImage::Array a = DisparityImage::Array::Constant(h, w, 0.1f);
    for (int b = 0; b < blocks; ++b) {
        int x0 = ux(rng), x1 = ux(rng), y0 = uy(rng), y1 = uy(rng);
        if (x0 > x1) std::swap(x0, x1);
        if (y0 > y1) std::swap(y0, y1);
        a.block(y0, x0, y1 - y0 + 1, x1 - x0 + 1).setConstant(ud(rng));
    }
    return DisparityImage(a);
}

/// 1..max_layers pixels per position with random disparities and colors; adjacent pixels are
/// linked with probability p_link while both directions are free. Always structurally valid.
inline Ldi random_layered_ldi(int w, int h, std::mt19937& rng, int max_layers = 3, double p_link = 0.8,
                              int channels = 3) {
    std::uniform_int_distribution<int> layers(1, max_layers);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::bernoulli_distribution link(p_link);
    Ldi ldi(w, h, channels);
    std::vector<std::vector<int>> at(std::size_t(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int n = layers(rng);
            for (int l = 0; l < n; ++l) {
                const int k = ldi.add_pixel(x, y, u(rng), true);
                for (int c = 0; c < channels; ++c) ldi.values()(c, k) = u(rng);
                at[std::size_t(y) * w + x].push_back(k);
            }
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (Dir d : {Dir::Right, Dir::Down}) {
                const int nx = x + dx(d), ny = y + dy(d);
                if (nx >= w || ny >= h) continue;
                for (int a : at[std::size_t(y) * w + x])
                    for (int b : at[std::size_t(ny) * w + nx])
                        if (!ldi.has_neighbor(a, d) && !ldi.has_neighbor(b, opposite(d)) && link(rng)) ldi.link(a, d, b);
            }
    return ldi;
}

}  // namespace testing
