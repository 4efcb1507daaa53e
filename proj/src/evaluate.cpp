#include "ldiphoto/evaluate.hpp"

#include <json.hpp>

#include <cmath>

#include "ldiphoto/inpaint.hpp"
#include "ldiphoto/metrics.hpp"
#include "ldiphoto/reproject.hpp"

namespace ldiphoto {

Inpainter diffusion_inpainter() {
    return [](Ldi& ldi, const Ldi&) {
        std::vector<std::uint8_t> targets(std::size_t(ldi.size()));
        for (int k = 0; k < ldi.size(); ++k) targets[std::size_t(k)] = !ldi.known(k);
        diffusion_inpaint(ldi, targets);
    };
}

Inpainter constant_inpainter(float gray) {
    return [gray](Ldi& ldi, const Ldi&) {
        for (int k = 0; k < ldi.size(); ++k)
            if (!ldi.known(k)) {
                ldi.color(k).setConstant(gray);
                ldi.set_known(k, true);
            }
    };
}

Inpainter oracle_inpainter() {
    return [](Ldi& ldi, const Ldi& truth) {
        for (int k = 0; k < ldi.size(); ++k)
            if (!ldi.known(k)) {
                ldi.color(k) = truth.color(k);
                ldi.set_known(k, true);
            }
    };
}

Inpainter neural_inpainter(const nn::NetworkSpec& net, const nn::WeightStore& weights) {
    return [net, weights](Ldi& ldi, const Ldi&) {
        std::vector<float> known(std::size_t(ldi.size()));
        for (int k = 0; k < ldi.size(); ++k) known[std::size_t(k)] = ldi.known(k) ? 1.0f : 0.0f;
        const nn::LdiTensor out = nn::run_unet(ldi, known, net, weights);
        for (int k = 0; k < ldi.size(); ++k)
            if (!ldi.known(k)) {
                ldi.color(k) = out.values.col(k);
                ldi.set_known(k, true);
            }
    };
}

Pose default_evaluation_pose(int width, int height, double fov_deg) {
    const Camera camera(width, height, fov_deg);
    return translation_pose(0.05 * width / camera.focal(), 0.0, 0.0);
}

InpaintReport evaluate_inpainting(const Imagef& image, const DisparityImage& disp, const Pose& pose,
                                  const Inpainter& inpaint, const EvaluationParams& params, Imagef* reprojected) {
    if (image.channels() != 3) throw InputError("evaluation expects an RGB image");
    const Camera camera(image.width(), image.height(), params.fov_deg, params.eps_disp);
    const Ldi source = lift_to_ldi(image, disp, params.tau_disp);

    const LayeredViewBuffer novel = reproject_splat(source, camera, pose);
    std::vector<int> layer;
    std::vector<const ViewSample*> samples;
    const Ldi truth = peel_to_ldi(novel, params.tau_disp, &layer, &samples);

    Ldi work = truth;
    InpaintReport report;
    report.pose = pose;
    for (int k = 0; k < work.size(); ++k)
        if (layer[std::size_t(k)] >= 1) {
            work.set_known(k, false);
            ++report.hidden_pixels;
        }
    report.empty = report.hidden_pixels == 0;
    if (!report.empty) inpaint(work, truth);

    double sq = 0;
    for (int k = 0; k < work.size(); ++k)
        if (layer[std::size_t(k)] >= 1) sq += (work.color(k) - truth.color(k)).cast<double>().squaredNorm();
    report.ldi_psnr = report.empty ? std::numeric_limits<double>::infinity()
                                   : psnr_from_mse(sq / (3.0 * report.hidden_pixels));

    std::vector<SplatPoint> back(std::size_t(work.size()));
    for (int k = 0; k < work.size(); ++k)
        back[std::size_t(k)] = {samples[std::size_t(k)]->position, work.disparity(k), work.color(k).head<3>()};
    const LayeredViewBuffer original = splat_points(back, camera, pose.inverse());
    Imagef view = original.front_image();
    const auto covered = original.coverage();
    long covered_count = 0;
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) {
            if (covered[std::size_t(y) * image.width() + x]) ++covered_count;
            else view.pixel(x, y) = image.pixel(x, y);  // lost off-frame, not scored
        }
    report.coverage = double(covered_count) / double(image.pixel_count());
    report.reprojected_psnr = psnr(view, image, covered);
    report.reprojected_ssim = ssim(view, image, covered);
    if (reprojected) *reprojected = std::move(view);
    return report;
}

std::string report_json(const std::vector<std::pair<std::string, InpaintReport>>& rows, const std::string& inpainter) {
    using nlohmann::json;
    auto num = [](double v) -> json { return std::isfinite(v) ? json(v) : json(nullptr); };
    json doc;
    doc["inpainter"] = inpainter;
    doc["columns"] = {"quality_ldi_psnr", "quality_reprojected_psnr", "quality_reprojected_ssim"};
    doc["reference"] = {{"row", "Farbrausch (trained weights)"},
                        {"quality_ldi_psnr", 33.852},
                        {"quality_reprojected_psnr", 34.126},
                        {"quality_reprojected_ssim", 0.9829}};
    doc["pose_note"] = "novel view is a guess: lateral shift of 5% of the image width at unit depth unless given";
    json items = json::array();
    double sum_ldi = 0, sum_psnr = 0, sum_ssim = 0;
    int finite = 0;
    for (const auto& [name, r] : rows) {
        const Eigen::Vector3d t = r.pose.translation();
        items.push_back({{"name", name},
                         {"empty", r.empty},
                         {"hidden_pixels", r.hidden_pixels},
                         {"coverage", r.coverage},
                         {"pose", {t.x(), t.y(), t.z()}},
                         {"quality_ldi_psnr", num(r.ldi_psnr)},
                         {"quality_reprojected_psnr", num(r.reprojected_psnr)},
                         {"quality_reprojected_ssim", num(r.reprojected_ssim)},
                         {"infinite_psnr", !std::isfinite(r.reprojected_psnr)}});
        if (std::isfinite(r.ldi_psnr) && std::isfinite(r.reprojected_psnr)) {
            sum_ldi += r.ldi_psnr;
            sum_psnr += r.reprojected_psnr;
            sum_ssim += r.reprojected_ssim;
            ++finite;
        }
    }
    doc["images"] = items;
    if (finite > 0)
        doc["mean"] = {{"quality_ldi_psnr", sum_ldi / finite},
                       {"quality_reprojected_psnr", sum_psnr / finite},
                       {"quality_reprojected_ssim", sum_ssim / finite}};
    return doc.dump(2);
}

}  // namespace ldiphoto
