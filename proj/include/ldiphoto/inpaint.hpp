#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "ldiphoto/ldi.hpp"
#include "ldiphoto/nn/network.hpp"

namespace ldiphoto {

enum class PixelClass : std::uint8_t {
    Known,
    OccludedUnknown,
    ForegroundNearEdge,
    PaddingSilhouette,
    PaddingInterior,
    Macroblock,
};

/// Pixels at the front side of a cut edge: a missing link toward a position holding a pixel
/// more than tau_disp behind.
std::vector<std::uint8_t> front_edge_pixels(const Ldi& ldi, float tau_disp);

/// mask=false -> OccludedUnknown; known pixels closer than `margin` connection steps to a
/// front-side edge pixel -> ForegroundNearEdge; everything else Known.
std::vector<PixelClass> classify(const Ldi& ldi, int margin = 3, float tau_disp = 0.05f);

struct DiffusionParams {
    int max_iterations = 2000;
    float tolerance = 1e-6f;  // relative residual
};

struct DiffusionStats {
    int iterations = 0;
    float last_change = 0.0f;  // final relative residual
    int isolated_pixels = 0;  // filled with the global mean color
};

/// Harmonic interpolation over LDI connections: the graph Laplacian system of the target pixels
/// is solved with conjugate gradients from a nearest-color start, every other pixel is a fixed
/// boundary value. Targets end up known.
void diffusion_inpaint(Ldi& ldi, const std::vector<std::uint8_t>& targets, const DiffusionParams& params = {},
                       DiffusionStats* stats = nullptr);

/// Targets from a class list.
std::vector<std::uint8_t> select_classes(const std::vector<PixelClass>& classes, std::initializer_list<PixelClass> wanted);

/// Runs the network with Known pixels as the input mask and composites its output into every
/// other pixel. Afterwards all pixels are known.
void neural_inpaint(Ldi& ldi, const nn::NetworkSpec& net, const nn::WeightStore& weights, int margin = 3,
                    float tau_disp = 0.05f);

}  // namespace ldiphoto
