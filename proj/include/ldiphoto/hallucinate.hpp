#pragma once

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "ldiphoto/ldi.hpp"

namespace ldiphoto {

/// One cut connection, recorded on its far (back) side.
struct DiscontinuityPixel {
    int back;   // LDI pixel on the far side
    int front;  // nearest pixel at the adjacent position
    Dir dir;    // direction from back toward front
};

/// Growth is allowed where normal . (p - anchor) >= 0.
struct ConstraintLine {
    Eigen::Vector2d anchor;
    Eigen::Vector2d normal;

    double signed_distance(const Eigen::Vector2d& p) const { return normal.dot(p - anchor); }
};

struct CurveGroup {
    /// Ordered chain, one entry per back pixel (the first cut edge seen at that pixel).
    std::vector<DiscontinuityPixel> chain;
    /// Every cut edge of every chain pixel facing this group's front surface.
    std::vector<DiscontinuityPixel> edges;
    bool closed = false;
    /// Junction cluster id at the first / last chain pixel, -1 for a free end.
    std::array<int, 2> junction = {-1, -1};
    /// Back and front disparities of every chain meeting at each junction end.
    std::array<std::vector<float>, 2> junction_surfaces;
    std::array<std::optional<ConstraintLine>, 2> constraints;
    float back_disparity = 0.0f;   // mean over the chain
    float front_disparity = 0.0f;  // mean over the facing pixels
};

struct HallucinateParams {
    float tau_disp = 0.05f;
    int min_group_length = 20;
    int iterations = 50;
    int tangent_window = 5;
};

/// One entry per cut edge: a missing link where the nearest pixel at the adjacent
/// position is more than tau_disp in front.
std::vector<DiscontinuityPixel> detect_discontinuities(const Ldi& ldi, float tau_disp);

/// Chains neighboring discontinuities that share back and front surfaces. Chains are split at
/// junctions and chains shorter than min_group_length are dropped. Junction ids are recorded on
/// chain ends. `ldi` supplies positions and disparities.
std::vector<CurveGroup> group_into_curves(const Ldi& ldi, const std::vector<DiscontinuityPixel>& disc,
                                          const HallucinateParams& params);

/// Adds perpendicular end constraints: free ends always; at junctions of three distinct
/// surfaces only the curve whose back side is the middle surface keeps its constraint.
std::vector<CurveGroup> derive_constraints(const Ldi& ldi, std::vector<CurveGroup> groups,
                                           const HallucinateParams& params);

struct ExpansionTrace {
    /// Group index that created each pixel, -1 for pixels present before expansion.
    std::vector<int> creator;
    /// New pixels per iteration.
    std::vector<int> created_per_iteration;
    /// Pairs of groups merged during expansion.
    std::vector<std::pair<int, int>> merges;
};

/// Grows hidden back-side pixels behind every group, one wavefront ring per iteration.
/// New pixels have unknown color and the mean disparity of the wavefront pixels that reached them.
Ldi expand(const Ldi& ldi, const std::vector<CurveGroup>& groups, const HallucinateParams& params,
           ExpansionTrace* trace = nullptr);

/// Convenience: detect -> group -> constrain -> expand.
Ldi hallucinate(const Ldi& ldi, const HallucinateParams& params, ExpansionTrace* trace = nullptr,
                std::vector<CurveGroup>* groups_out = nullptr);

/// Writes layer_<n>.png (color, unknown pixels magenta) and layer_<n>_disp.png per layer.
void dump_layers(const Ldi& ldi, const std::filesystem::path& dir);

}  // namespace ldiphoto
