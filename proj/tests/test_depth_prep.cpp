#include <doctest.h>

#include <algorithm>

#include "ldiphoto/depth_prep.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ldiphoto;

namespace {

FilterParams defaults() { return {}; }

DisparityImage noisy_blocks(int w, int h, std::mt19937& rng) {
    DisparityImage::Array a = testing::random_blocks(w, h, rng, 6).values();
    std::normal_distribution<float> n(0.0f, 0.03f);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = std::clamp(a.data()[i] + n(rng), 0.0f, 1.0f);
    return DisparityImage(a);
}

}  // namespace

TEST_CASE("weighted median index balances weight on both sides") {
    const std::vector<WeightedSample> s = {{3.0f, 1.0}, {1.0f, 1.0}, {2.0f, 5.0}};
    CHECK(weighted_median_index(s) == 2);
    const std::vector<WeightedSample> heavy = {{0.1f, 1.0}, {0.2f, 1.0}, {0.9f, 10.0}};
    CHECK(weighted_median_index(heavy) == 2);
    const std::vector<WeightedSample> zero = {{0.4f, 0.0}, {0.1f, 0.0}, {0.7f, 0.0}, {0.2f, 0.0}};
    CHECK(zero[weighted_median_index(zero)].value == 0.2f);
    const std::vector<WeightedSample> skip = {{0.1f, 0.0}, {0.5f, 1.0}, {0.9f, 0.0}};
    CHECK(weighted_median_index(skip) == 1);
}

TEST_CASE("weighted median: constant and step images are fixed points") {
    const FilterParams p = defaults();
    const DisparityImage c = DisparityImage::constant(20, 16, 0.37f);
    CHECK((weighted_median_filter(c, p).values() == c.values()).all());

    DisparityImage::Array a(16, 20);
    a.leftCols(9).setConstant(0.2f);
    a.rightCols(11).setConstant(0.8f);
    const DisparityImage step(a);
    CHECK((weighted_median_filter(step, p).values() == step.values()).all());
}

TEST_CASE("weighted median matches the rank-counting oracle") {
    std::mt19937 rng(21);
    const FilterParams p = defaults();
    for (int t = 0; t < 6; ++t) {
        const DisparityImage d = t % 2 ? testing::random_disparity(9, 9, rng) : noisy_blocks(24, 18, rng);
        const DisparityImage out = weighted_median_filter(d, p);
        for (int y = 0; y < d.height(); ++y)
            for (int x = 0; x < d.width(); ++x)
                CHECK(out(x, y) == oracle::weighted_median(d, x, y, p.kernel_size, p.sigma_disparity, p.tau_disp));
    }
}

TEST_CASE("weighted median only selects values from its window") {
    std::mt19937 rng(22);
    const DisparityImage d = noisy_blocks(30, 20, rng);
    const DisparityImage out = weighted_median_filter(d, defaults());
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 30; ++x) {
            bool found = false;
            for (int wy = std::max(0, y - 2); wy <= std::min(19, y + 2); ++wy)
                for (int wx = std::max(0, x - 2); wx <= std::min(29, x + 2); ++wx) found |= d(wx, wy) == out(x, y);
            CHECK(found);
        }
}

TEST_CASE("weighted median is idempotent on isolated rectangles of contrast >= 0.2") {
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> at(2, 20), side(5, 10);
    for (float contrast : {0.2f, 0.3f, 0.5f}) {
        for (int t = 0; t < 20; ++t) {
            DisparityImage::Array a = DisparityImage::Array::Constant(32, 32, 0.2f);
            a.block(at(rng), at(rng), side(rng), side(rng)).setConstant(0.2f + contrast);
            const DisparityImage d(a);
            const DisparityImage once = weighted_median_filter(d, defaults());
            CHECK((weighted_median_filter(once, defaults()).values() == once.values()).all());
            if (contrast >= 0.3f) CHECK((once.values() == d.values()).all());
        }
    }
}

TEST_CASE("weighted median keeps rounding low-contrast corners on repeated passes") {
    // Edge pixels carry no weight, so at a convex corner four interior samples face ten
    // background samples of weight exp(-0.1^2 / 0.08) = 0.88: each pass takes another step.
    DisparityImage::Array a = DisparityImage::Array::Constant(32, 32, 0.2f);
    a.block(10, 10, 8, 8).setConstant(0.3f);
    const DisparityImage once = weighted_median_filter(DisparityImage(a), defaults());
    const DisparityImage twice = weighted_median_filter(once, defaults());
    CHECK(once(10, 10) == 0.2f);
    CHECK((twice.values() != once.values()).any());
}

TEST_CASE("small components: 19 pixels are absorbed, 20 survive") {
    const FilterParams p = defaults();
    for (int n : {19, 20}) {
        DisparityImage::Array a = DisparityImage::Array::Constant(16, 16, 0.9f);
        for (int i = 0; i < n; ++i) a(4 + i / 5, 4 + i % 5) = 0.5f;
        const DisparityImage out = merge_small_components(DisparityImage(a), p);
        const int mids = int((out.values() == 0.5f).count());
        CHECK(mids == (n < 20 ? 0 : n));
        if (n < 20) CHECK((out.values() == 0.9f).all());
    }
}

TEST_CASE("small components merge toward the larger contact surface") {
    // Foreground 0.9 above row 8, background 0.2 below; the blob meets the image border on the left.
    DisparityImage::Array a(16, 16);
    a.topRows(8).setConstant(0.9f);
    a.bottomRows(8).setConstant(0.2f);
    std::vector<std::pair<int, int>> blob = {{0, 3}, {0, 4}, {0, 5}};
    for (int y = 6; y < 8; ++y)
        for (int x = 0; x < 7; ++x) blob.push_back({x, y});
    for (auto [x, y] : blob) a(y, x) = 0.5f;
    const DisparityImage d(a);

    int fore = 0, back = 0;
    for (auto [x, y] : blob) {
        const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
        for (const auto& q : nb) {
            if (!d.contains(q[0], q[1]) || d(q[0], q[1]) == 0.5f) continue;
            (d(q[0], q[1]) > 0.5f ? fore : back) += 1;
        }
    }
    REQUIRE(fore == 12);
    REQUIRE(back == 7);
    const DisparityImage out = merge_small_components(d, defaults());
    for (auto [x, y] : blob) CHECK(out(x, y) == 0.9f);
}

TEST_CASE("no component below the minimum survives merging") {
    std::mt19937 rng(24);
    const FilterParams p = defaults();
    for (int t = 0; t < 10; ++t) {
        const DisparityImage d = t % 2 ? noisy_blocks(40, 30, rng) : testing::random_disparity(24, 24, rng);
        const DisparityImage out = merge_small_components(weighted_median_filter(d, p), p);
        const auto sizes = oracle::component_sizes(out, p.tau_disp);
        CHECK(*std::min_element(sizes.begin(), sizes.end()) >= p.min_component);
    }
}

TEST_CASE("labels are dense and follow scanline order") {
    std::mt19937 rng(25);
    const DisparityImage d = testing::random_blocks(20, 20, rng);
    int count = 0;
    const auto labels = label_components(d, 0.05f, &count);
    CHECK(count == int(oracle::component_sizes(d, 0.05f).size()));
    int next = 0;
    for (int l : labels) {
        CHECK(l <= next);
        if (l == next) ++next;
    }
    CHECK(next == count);
}

TEST_CASE("filter parameters are checked") {
    FilterParams p;
    p.kernel_size = 4;
    CHECK_THROWS_AS(p.check(), InputError);
    p = {};
    p.sigma_disparity = 0;
    CHECK_THROWS_AS(p.check(), InputError);
    p = {};
    p.tau_disp = 1.0f;
    CHECK_THROWS_AS(p.check(), InputError);
    p = {};
    p.min_component = 0;
    CHECK_THROWS_AS(p.check(), InputError);
}
