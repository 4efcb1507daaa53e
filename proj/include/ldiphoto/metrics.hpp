#pragma once

#include <cstdint>
#include <vector>

#include "ldiphoto/image.hpp"

namespace ldiphoto {

/// PSNR in dB for values in [0, 1]; +infinity when identical. An optional pixel mask restricts the
/// comparison (empty = all pixels).
double psnr(const Imagef& a, const Imagef& b, const std::vector<std::uint8_t>& mask = {});

/// PSNR from a mean squared error.
double psnr_from_mse(double mse);

/// Per-pixel SSIM averaged over channels: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 1. Windows are clipped and renormalized at the border.
Imaged ssim_map(const Imagef& a, const Imagef& b);

/// Mean of the SSIM map over the mask (empty = all pixels).
double ssim(const Imagef& a, const Imagef& b, const std::vector<std::uint8_t>& mask = {});

}  // namespace ldiphoto
