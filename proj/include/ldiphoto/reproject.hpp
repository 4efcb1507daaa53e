#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "ldiphoto/camera.hpp"
#include "ldiphoto/ldi.hpp"

namespace ldiphoto {

struct ViewSample {
    Eigen::Vector3f color;
    float disparity;            // in the target view, clamped to [0, 1]
    double depth;               // metric depth in the target view
    int source;                 // source pixel / point id
    Eigen::Vector2d position;   // continuous image-plane position of the pixel center
};

/// Per target pixel, samples ordered near to far (decreasing disparity, ties by source id).
class LayeredViewBuffer {
public:
    LayeredViewBuffer(int width, int height) : width_(width), height_(height), lists_(std::size_t(width) * height) {}

    int width() const { return width_; }
    int height() const { return height_; }
    const std::vector<ViewSample>& at(int x, int y) const { return lists_[std::size_t(y) * width_ + x]; }
    std::vector<ViewSample>& at(int x, int y) { return lists_[std::size_t(y) * width_ + x]; }

    std::size_t sample_count() const;
    int max_layers() const;

    /// Front-most color per pixel; empty pixels get `fill`.
    Imagef front_image(float fill = 0.0f) const;
    /// Empty pixels are false.
    std::vector<std::uint8_t> coverage() const;

private:
    int width_;
    int height_;
    std::vector<std::vector<ViewSample>> lists_;
};

/// A point to splat: continuous pixel-center position in the source view plus attributes.
struct SplatPoint {
    Eigen::Vector2d position;
    float disparity;
    Eigen::Vector3f color;
};

/// Forward-splats points seen by `camera` into the view of a camera moved by `pose`.
/// Each point lands in at most one target list (nearest pixel); points behind the camera
/// or outside the frame are dropped.
LayeredViewBuffer splat_points(std::span<const SplatPoint> points, const Camera& camera, const Pose& pose);

/// Splats every LDI pixel from its lattice center.
LayeredViewBuffer reproject_splat(const Ldi& ldi, const Camera& camera, const Pose& pose);

/// Builds an LDI from a layered view: layer order per position follows the buffer order, and
/// samples at 4-adjacent positions connect when their disparities differ by at most tau_disp
/// (greedy closest-disparity matching, one link per direction). Pixel ids run position-major.
Ldi peel_to_ldi(const LayeredViewBuffer& view, float tau_disp, std::vector<int>* layer_of_pixel = nullptr,
                std::vector<const ViewSample*>* sample_of_pixel = nullptr);

}  // namespace ldiphoto
