#include "ldiphoto/reproject.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace ldiphoto {

std::size_t LayeredViewBuffer::sample_count() const {
    std::size_t n = 0;
    for (const auto& l : lists_) n += l.size();
    return n;
}

int LayeredViewBuffer::max_layers() const {
    std::size_t best = 0;
    for (const auto& l : lists_) best = std::max(best, l.size());
    return int(best);
}

Imagef LayeredViewBuffer::front_image(float fill) const {
    Imagef img(width_, height_, 3);
    img.data().setConstant(fill);
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x)
            if (!at(x, y).empty()) img.pixel(x, y) = at(x, y).front().color;
    return img;
}

std::vector<std::uint8_t> LayeredViewBuffer::coverage() const {
    std::vector<std::uint8_t> out(lists_.size());
    for (std::size_t i = 0; i < lists_.size(); ++i) out[i] = lists_[i].empty() ? 0 : 1;
    return out;
}

LayeredViewBuffer splat_points(std::span<const SplatPoint> points, const Camera& camera, const Pose& pose) {
    LayeredViewBuffer view(camera.width, camera.height);
    const Pose to_target = pose.inverse();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const SplatPoint& p = points[i];
        const Eigen::Vector3d world = camera.unproject(p.position, double(p.disparity));
        const Eigen::Vector3d moved = to_target * world;
        if (moved.z() <= 1e-9) continue;
        const Eigen::Vector2d q = camera.project(moved);
        // Pixel (x, y) has its center at (x + 0.5, y + 0.5).
        const long tx = std::lround(q.x() - 0.5);
        const long ty = std::lround(q.y() - 0.5);
        if (tx < 0 || ty < 0 || tx >= camera.width || ty >= camera.height) continue;
        const float d = float(std::clamp(1.0 / moved.z(), 0.0, 1.0));
        view.at(int(tx), int(ty)).push_back({p.color, d, moved.z(), int(i), q});
    }
    for (int y = 0; y < view.height(); ++y)
        for (int x = 0; x < view.width(); ++x) {
            auto& list = view.at(x, y);
            std::sort(list.begin(), list.end(), [](const ViewSample& a, const ViewSample& b) {
                return std::tie(a.depth, a.source) < std::tie(b.depth, b.source);
            });
        }
    return view;
}

LayeredViewBuffer reproject_splat(const Ldi& ldi, const Camera& camera, const Pose& pose) {
    if (ldi.color_channels() != 3) throw InputError("reprojection expects an RGB LDI");
    if (ldi.width() != camera.width || ldi.height() != camera.height) throw InputError("camera does not match LDI size");
    std::vector<SplatPoint> points(std::size_t(ldi.size()));
    for (int k = 0; k < ldi.size(); ++k) {
        points[std::size_t(k)] = {Eigen::Vector2d(ldi.x(k) + 0.5, ldi.y(k) + 0.5), ldi.disparity(k),
                                  ldi.color(k).head<3>()};
    }
    return splat_points(points, camera, pose);
}

namespace {

// Greedy closest-disparity matching between the sample lists of two adjacent positions.
void connect_lists(Ldi& ldi, const std::vector<int>& ids_a, const std::vector<int>& ids_b, Dir dir, float tau) {
    struct Pair {
        float diff;
        int i, j;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < ids_a.size(); ++i)
        for (std::size_t j = 0; j < ids_b.size(); ++j) {
            const float diff = std::abs(ldi.disparity(ids_a[i]) - ldi.disparity(ids_b[j]));
            if (diff <= tau) pairs.push_back({diff, int(i), int(j)});
        }
    std::sort(pairs.begin(), pairs.end(),
              [](const Pair& a, const Pair& b) { return std::tie(a.diff, a.i, a.j) < std::tie(b.diff, b.i, b.j); });
    for (const Pair& p : pairs) {
        const int a = ids_a[std::size_t(p.i)];
        const int b = ids_b[std::size_t(p.j)];
        if (!ldi.has_neighbor(a, dir) && !ldi.has_neighbor(b, opposite(dir))) ldi.link(a, dir, b);
    }
}

}  // namespace

Ldi peel_to_ldi(const LayeredViewBuffer& view, float tau_disp, std::vector<int>* layer_of_pixel,
                std::vector<const ViewSample*>* sample_of_pixel) {
    const int w = view.width();
    const int h = view.height();
    Ldi ldi(w, h, 3);
    ldi.reserve_pixels(int(view.sample_count()));
    std::vector<std::vector<int>> ids(std::size_t(w) * h);
    if (layer_of_pixel) layer_of_pixel->assign(std::size_t(ldi.size()), 0);
    if (sample_of_pixel) sample_of_pixel->assign(std::size_t(ldi.size()), nullptr);
    int k = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const auto& list = view.at(x, y);
            for (std::size_t l = 0; l < list.size(); ++l, ++k) {
                ldi.index()(0, k) = x;
                ldi.index()(1, k) = y;
                ldi.color(k) = list[l].color;
                ldi.disparity(k) = list[l].disparity;
                ldi.set_known(k, true);
                ids[std::size_t(y) * w + x].push_back(k);
                if (layer_of_pixel) (*layer_of_pixel)[std::size_t(k)] = int(l);
                if (sample_of_pixel) (*sample_of_pixel)[std::size_t(k)] = &list[l];
            }
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const auto& here = ids[std::size_t(y) * w + x];
            if (x + 1 < w) connect_lists(ldi, here, ids[std::size_t(y) * w + x + 1], Dir::Right, tau_disp);
            if (y + 1 < h) connect_lists(ldi, here, ids[std::size_t(y + 1) * w + x], Dir::Down, tau_disp);
        }
    return ldi;
}

}  // namespace ldiphoto
