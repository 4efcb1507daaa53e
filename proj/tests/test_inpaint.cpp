#include <doctest.h>

#include <Eigen/LU>

#include <cmath>
#include <json.hpp>

#include "ldiphoto/evaluate.hpp"
#include "ldiphoto/inpaint.hpp"
#include "ldiphoto/metrics.hpp"
#include "ldiphoto/nn/reference2d.hpp"
#include "ldiphoto/synthetic.hpp"
#include "support.hpp"

using namespace ldiphoto;

namespace {

DisparityImage step(int w, int h, int split, float left, float right) {
    DisparityImage::Array a(h, w);
    a.leftCols(split).setConstant(left);
    a.rightCols(w - split).setConstant(right);
    return DisparityImage(a);
}

/// Harmonic fill by a dense direct solve of the full Laplacian system.
Eigen::MatrixXd dense_harmonic(const Ldi& ldi, const std::vector<std::uint8_t>& targets) {
    const int n = ldi.size(), c = ldi.color_channels();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n), b = Eigen::MatrixXd::Zero(n, c);
    for (int k = 0; k < n; ++k) {
        if (!targets[std::size_t(k)]) {
            a(k, k) = 1;
            b.row(k) = ldi.color(k).cast<double>().transpose();
            continue;
        }
        for (Dir d : kAllDirs) {
            const int q = ldi.neighbor(k, d);
            if (q < 0) continue;
            a(k, k) += 1;
            a(k, q) -= 1;
        }
    }
    return a.partialPivLu().solve(b);
}

}  // namespace

TEST_CASE("classify: a connected known LDI is all known") {
    std::mt19937 rng(61);
    const Ldi ldi = lift_to_ldi(testing::random_image(12, 10, rng), DisparityImage::constant(12, 10, 0.4f), 0.05f);
    for (PixelClass c : classify(ldi)) CHECK(c == PixelClass::Known);
}

TEST_CASE("classify: the near-edge strip is margin columns wide on the front side") {
    std::mt19937 rng(62);
    const int w = 20, h = 12, split = 10;
    const Ldi ldi = lift_to_ldi(testing::random_image(w, h, rng), step(w, h, split, 0.2f, 0.8f), 0.05f);
    for (int margin : {1, 3, 5}) {
        const auto classes = classify(ldi, margin);
        for (int k = 0; k < ldi.size(); ++k) {
            const bool strip = ldi.x(k) >= split && ldi.x(k) < split + margin;
            CHECK((classes[std::size_t(k)] == PixelClass::ForegroundNearEdge) == strip);
        }
    }
    const auto edge = front_edge_pixels(ldi, 0.05f);
    for (int k = 0; k < ldi.size(); ++k) CHECK(bool(edge[std::size_t(k)]) == (ldi.x(k) == split));
}

TEST_CASE("classify: unknown pixels are occluded-unknown") {
    std::mt19937 rng(63);
    Ldi ldi = testing::random_layered_ldi(10, 10, rng, 2);
    int unknown = 0;
    for (int k = 0; k < ldi.size(); k += 3) {
        ldi.set_known(k, false);
        ++unknown;
    }
    const auto classes = classify(ldi);
    CHECK(std::count(classes.begin(), classes.end(), PixelClass::OccludedUnknown) == unknown);
    const auto t = select_classes(classes, {PixelClass::OccludedUnknown});
    for (int k = 0; k < ldi.size(); ++k) CHECK(bool(t[std::size_t(k)]) == !ldi.known(k));
}

TEST_CASE("diffusion: uniform boundary fills uniformly") {
    std::mt19937 rng(64);
    Ldi ldi = lift_to_ldi(testing::random_image(16, 16, rng), DisparityImage::constant(16, 16, 0.5f), 0.05f);
    std::vector<std::uint8_t> t(std::size_t(ldi.size()), 0);
    for (int k = 0; k < ldi.size(); ++k) {
        const bool inner = ldi.x(k) > 2 && ldi.x(k) < 13 && ldi.y(k) > 2 && ldi.y(k) < 13;
        if (inner) t[std::size_t(k)] = 1;
        else ldi.color(k).setConstant(0.5f);
    }
    diffusion_inpaint(ldi, t);
    for (int k = 0; k < ldi.size(); ++k) {
        CHECK(ldi.known(k));
        CHECK((ldi.color(k).array() - 0.5f).abs().maxCoeff() <= 1e-5f);
    }
}

TEST_CASE("diffusion: a gap between 0.2 and 0.6 fills linearly") {
    // one row of 9 pixels, the ends fixed
    Ldi ldi(9, 1, 1);
    for (int x = 0; x < 9; ++x) ldi.add_pixel(x, 0, 0.5f, x == 0 || x == 8);
    for (int x = 0; x < 8; ++x) ldi.link(x, Dir::Right, x + 1);
    ldi.color(0)[0] = 0.2f;
    ldi.color(8)[0] = 0.6f;
    std::vector<std::uint8_t> t(9, 1);
    t[0] = t[8] = 0;
    diffusion_inpaint(ldi, t);
    for (int x = 0; x < 9; ++x) CHECK(ldi.color(x)[0] == doctest::Approx(0.2 + 0.05 * x).epsilon(1e-5));
    CHECK(ldi.color(4)[0] == doctest::Approx(0.4).epsilon(1e-5));
}

TEST_CASE("diffusion: matches a dense direct solve and respects the maximum principle") {
    std::mt19937 rng(65);
    for (int t = 0; t < 6; ++t) {
        Ldi ldi = testing::random_layered_ldi(9, 8, rng, 3, 0.9);
        std::bernoulli_distribution pick(0.4);
        std::vector<std::uint8_t> targets(std::size_t(ldi.size()));
        for (auto& v : targets) v = pick(rng);
        // every target must reach a fixed pixel for the dense system to be regular
        const Ldi before = ldi;
        DiffusionStats st;
        diffusion_inpaint(ldi, targets, {}, &st);
        if (st.isolated_pixels > 0) continue;
        const Eigen::MatrixXd want = dense_harmonic(before, targets);
        float lo = 1, hi = 0;
        for (int k = 0; k < ldi.size(); ++k)
            if (!targets[std::size_t(k)]) {
                lo = std::min(lo, before.color(k).minCoeff());
                hi = std::max(hi, before.color(k).maxCoeff());
            }
        for (int k = 0; k < ldi.size(); ++k) {
            CHECK((ldi.color(k).cast<double>() - want.row(k).transpose()).cwiseAbs().maxCoeff() <= 1e-4);
            CHECK(ldi.color(k).minCoeff() >= lo - 1e-5f);
            CHECK(ldi.color(k).maxCoeff() <= hi + 1e-5f);
            if (!targets[std::size_t(k)]) CHECK(ldi.color(k) == before.color(k));
        }
    }
}

TEST_CASE("diffusion: isolated target regions take the mean boundary color") {
    Ldi ldi(8, 8, 3);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) ldi.add_pixel(x, y, 0.5f, true);
    for (int k = 0; k < 64; ++k) ldi.color(k).setConstant(k % 2 ? 0.25f : 0.75f);
    const int island = ldi.add_pixel(3, 3, 0.1f, false);
    std::vector<std::uint8_t> t(std::size_t(ldi.size()), 0);
    t[std::size_t(island)] = 1;
    DiffusionStats st;
    diffusion_inpaint(ldi, t, {}, &st);
    CHECK(st.isolated_pixels == 1);
    CHECK((ldi.color(island).array() - 0.5f).abs().maxCoeff() <= 1e-6f);
}

TEST_CASE("diffusion: target length must match") {
    Ldi ldi(8, 8, 3);
    ldi.add_pixel(0, 0, 0.5f, true);
    CHECK_THROWS_AS(diffusion_inpaint(ldi, {0, 1}), InputError);
}

TEST_CASE("neural inpaint: zero weights give the output bias") {
    std::mt19937 rng(66);
    Ldi ldi = lift_to_ldi(testing::random_image(16, 16, rng), step(16, 16, 8, 0.2f, 0.8f), 0.05f);
    for (int k = 0; k < ldi.size(); k += 5) ldi.set_known(k, false);
    const auto classes = classify(ldi);
    const Ldi before = ldi;
    const nn::NetworkSpec net = nn::NetworkSpec::from_json(
        R"({"input_channels": 3, "layers": [{"type": "pconv", "name": "p", "k": 3, "in": 3, "out": 3}]})");
    nn::WeightStore w;
    w.set("p.weight", {3, 3, 3, 3}, std::vector<float>(81, 0.0f));
    w.set("p.bias", {3}, {0.1f, 0.2f, 0.3f});
    neural_inpaint(ldi, net, w);
    for (int k = 0; k < ldi.size(); ++k) {
        CHECK(ldi.known(k));
        if (classes[std::size_t(k)] == PixelClass::Known) {
            CHECK(ldi.color(k) == before.color(k));
        } else {
            // masked-out kernels leave everything at zero, including the bias
            const bool any_known_nearby = ldi.color(k)[0] != 0.0f;
            if (any_known_nearby) CHECK(ldi.color(k) == Eigen::Vector3f(0.1f, 0.2f, 0.3f));
        }
    }
}

TEST_CASE("neural inpaint on one layer equals the 2D network") {
    std::mt19937 rng(67);
    const Imagef img = testing::random_image(20, 16, rng);
    Ldi ldi = lift_to_ldi(img, DisparityImage::constant(20, 16, 0.5f), 0.05f);
    Eigen::RowVectorXf known = Eigen::RowVectorXf::Ones(ldi.size());
    for (int k = 0; k < ldi.size(); k += 4) {
        ldi.set_known(k, false);
        known[k] = 0;
    }
    const nn::NetworkSpec net = nn::NetworkSpec::unet(3, 4, 2, 3);
    const nn::WeightStore w = nn::random_weights(net, rng);
    const nn::Tensor2D ref = nn::run_unet_2d(img, known, net, w);
    neural_inpaint(ldi, net, w);
    for (int k = 0; k < ldi.size(); ++k) {
        if (known[k] > 0) CHECK(ldi.color(k) == img.pixel(ldi.x(k), ldi.y(k)));
        else CHECK((ldi.color(k) - ref.values.col(k)).cwiseAbs().maxCoeff() <= 1e-4f);
    }
}

TEST_CASE("metrics: psnr and ssim on known cases") {
    std::mt19937 rng(68);
    const Imagef a = testing::random_image(24, 24, rng);
    CHECK(std::isinf(psnr(a, a)));
    CHECK(ssim(a, a) == doctest::Approx(1.0));
    Imagef b = a;
    b.data().array() += 0.1f;
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-4));
    CHECK(psnr_from_mse(1e-4) == doctest::Approx(40.0));
    std::vector<std::uint8_t> mask(24 * 24, 0);
    mask[0] = 1;
    Imagef c = a;
    c.data().col(5).array() += 0.5f;
    CHECK(std::isinf(psnr(a, c, mask)));
    CHECK(ssim(a, c) < 1.0);
    Imagef noise = testing::random_image(24, 24, rng);
    CHECK(ssim(a, noise) < 0.2);
}

TEST_CASE("evaluation: the identity pose hides nothing") {
    const Scene s = desk_scene(0, 128, 96);
    const InpaintReport r = evaluate_inpainting(s.image, s.disparity, Pose::Identity(), diffusion_inpainter());
    CHECK(r.empty);
    CHECK(r.hidden_pixels == 0);
    CHECK(std::isinf(r.reprojected_psnr));
}

TEST_CASE("evaluation: the oracle inpainter round-trips losslessly") {
    for (int i = 0; i < 3; ++i) {
        const Scene s = desk_scene(i, 128, 96);
        const Pose pose = default_evaluation_pose(128, 96);
        const InpaintReport r = evaluate_inpainting(s.image, s.disparity, pose, oracle_inpainter());
        CHECK_FALSE(r.empty);
        CHECK(r.hidden_pixels > 0);
        CHECK(std::isinf(r.ldi_psnr));
        CHECK(std::isinf(r.reprojected_psnr));
        CHECK(r.coverage > 0.9);
    }
}

TEST_CASE("evaluation: diffusion beats gray fill on a desk scene") {
    const Scene s = desk_scene(1, 128, 96);
    const Pose pose = default_evaluation_pose(128, 96);
    const InpaintReport d = evaluate_inpainting(s.image, s.disparity, pose, diffusion_inpainter());
    const InpaintReport g = evaluate_inpainting(s.image, s.disparity, pose, constant_inpainter());
    CHECK(d.reprojected_psnr > g.reprojected_psnr);
    CHECK(d.ldi_psnr > g.ldi_psnr);

    const auto doc = nlohmann::json::parse(report_json({{"desk_1", d}}, "diffusion"));
    CHECK(doc.dump().find("33.852") != std::string::npos);
    CHECK(doc.dump().find("desk_1") != std::string::npos);
}
