#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldiphoto/image.hpp"

namespace ldiphoto {

enum class SyntheticDepth { Gradient, Constant, Steps };

/// "gradient", "constant" or "steps"; throws InputError otherwise.
SyntheticDepth parse_synthetic_depth(const std::string& name);

/// Test inputs only. Gradient: 0.2 -> 0.8 left to right. Constant: 0.5.
/// Steps: three vertical bands at 0.2, 0.5 and 0.8.
DisparityImage synthetic_depth(SyntheticDepth kind, int width, int height);

/// Sum of octaves of smoothly interpolated lattice noise, roughly in [-1, 1].
Eigen::ArrayXXf fractal_noise(int width, int height, std::uint32_t seed, int octaves, double period);

struct Scene {
    std::string name;
    Imagef image;
    DisparityImage disparity;
};

/// Table-top scenes: a back wall, a receding table and a few boxes and cylinders on it.
/// Scene 0 is a fixed three-depth layout (near block overlapping a mid and a far region).
Scene desk_scene(int index, int width = 128, int height = 96);
std::vector<Scene> desk_corpus(int count = 20, int width = 128, int height = 96);

/// Large desk scene with textured surfaces; the disparity is at a quarter of the image resolution.
Scene teaser_scene(int width = 1152, int height = 1536);

}  // namespace ldiphoto
