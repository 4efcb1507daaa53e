#pragma once

#include <functional>
#include <string>

#include "ldiphoto/camera.hpp"
#include "ldiphoto/image.hpp"
#include "ldiphoto/ldi.hpp"
#include "ldiphoto/nn/network.hpp"

namespace ldiphoto {

/// Fills every mask=false pixel of `ldi`. `truth` is the same LDI with ground-truth colors,
/// only meant for the oracle.
using Inpainter = std::function<void(Ldi& ldi, const Ldi& truth)>;

Inpainter diffusion_inpainter();
Inpainter constant_inpainter(float gray = 0.5f);
Inpainter oracle_inpainter();
Inpainter neural_inpainter(const nn::NetworkSpec& net, const nn::WeightStore& weights);

struct InpaintReport {
    bool empty = true;          // no hidden pixels in the novel view
    int hidden_pixels = 0;      // layer >= 1 pixels of the peeled LDI
    double ldi_psnr = 0;        // over hidden pixels
    double reprojected_psnr = 0;
    double reprojected_ssim = 0;
    double coverage = 0;        // fraction of original pixels that survive the round trip
    Pose pose = Pose::Identity();
};

struct EvaluationParams {
    float tau_disp = 0.05f;
    double fov_deg = 60.0;
    double eps_disp = 0.01;
};

/// Lateral shift of 5% of the image width at unit depth.
Pose default_evaluation_pose(int width, int height, double fov_deg = 60.0);

/// Lift to a single layer, splat into the novel view and peel an LDI, treat all layers but the
/// first as unknown and inpaint them, then splat back into the original view from each sample's
/// continuous position and compare against the input.
InpaintReport evaluate_inpainting(const Imagef& image, const DisparityImage& disp, const Pose& pose,
                                  const Inpainter& inpaint, const EvaluationParams& params = {},
                                  Imagef* reprojected = nullptr);

/// Table-shaped JSON document of one or more reports, with the reference values.
std::string report_json(const std::vector<std::pair<std::string, InpaintReport>>& rows, const std::string& inpainter);

}  // namespace ldiphoto
