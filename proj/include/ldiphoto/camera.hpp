#pragma once

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ldiphoto/error.hpp"

namespace ldiphoto {

/// Pinhole camera centered on the image. Image-plane coordinates are continuous with
/// pixel (x, y) covering [x, x+1] x [y, y+1]; camera space is x right, y down, z forward.
template <typename Scalar>
struct PinholeCamera {
    using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
    using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

    int width = 0;
    int height = 0;
    Scalar fov_deg = Scalar(60);
    Scalar eps_disp = Scalar(0.01);

    PinholeCamera() = default;
    PinholeCamera(int w, int h, Scalar fov = Scalar(60), Scalar eps = Scalar(0.01))
        : width(w), height(h), fov_deg(fov), eps_disp(eps) {
        if (!(fov > Scalar(10) && fov < Scalar(120))) throw InputError("field of view must lie in (10, 120) degrees");
        if (!(eps > Scalar(0))) throw InputError("eps_disp must be positive");
    }

    Scalar focal() const {
        return Scalar(0.5) * Scalar(height) / std::tan(fov_deg * Scalar(std::numbers::pi) / Scalar(360));
    }
    Vec2 principal_point() const { return {Scalar(0.5) * Scalar(width), Scalar(0.5) * Scalar(height)}; }

    /// Metric depth for a disparity; the clamp keeps zero-disparity content finite.
    Scalar depth(Scalar disparity) const { return Scalar(1) / std::max(disparity, eps_disp); }

    Vec3 ray(const Vec2& p) const {
        const Vec2 c = principal_point();
        const Scalar f = focal();
        return {(p.x() - c.x()) / f, (p.y() - c.y()) / f, Scalar(1)};
    }

    Vec3 unproject(const Vec2& p, Scalar disparity) const { return ray(p) * depth(disparity); }

    Vec2 project(const Vec3& point) const {
        const Vec2 c = principal_point();
        const Scalar f = focal();
        return {c.x() + f * point.x() / point.z(), c.y() + f * point.y() / point.z()};
    }
};

using Camera = PinholeCamera<double>;

/// Rigid motion of the viewing camera expressed in the source camera frame.
/// A point X in source camera coordinates appears at pose.inverse() * X in the moved camera.
using Pose = Eigen::Isometry3d;

inline Pose translation_pose(double tx, double ty, double tz) {
    Pose p = Pose::Identity();
    p.translation() = Eigen::Vector3d(tx, ty, tz);
    return p;
}

}  // namespace ldiphoto
