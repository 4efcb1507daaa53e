#include "ldiphoto/ldi.hpp"

#include <cmath>
#include <sstream>

namespace ldiphoto {

Ldi::Ldi(int width, int height, int color_channels)
    : width_(width), height_(height), values_(color_channels + 1, 0), index_(6, 0) {}

int Ldi::add_pixel(int px, int py, float d, bool is_known) {
    const int k = reserve_pixels(1);
    index_(0, k) = px;
    index_(1, k) = py;
    disparity(k) = d;
    mask_[std::size_t(k)] = is_known ? 1 : 0;
    return k;
}

int Ldi::reserve_pixels(int count) {
    const int first = size();
    values_.conservativeResize(Eigen::NoChange, first + count);
    values_.rightCols(count).setZero();
    index_.conservativeResize(Eigen::NoChange, first + count);
    index_.rightCols(count).setConstant(kNoNeighbor);
    mask_.resize(std::size_t(first + count), 0);
    return first;
}

void Ldi::link(int a, Dir d, int b) {
    index_(2 + int(d), a) = b;
    index_(2 + int(opposite(d)), b) = a;
}

void Ldi::unlink(int a, Dir d) {
    const int b = neighbor(a, d);
    if (b == kNoNeighbor) return;
    index_(2 + int(d), a) = kNoNeighbor;
    if (neighbor(b, opposite(d)) == a) index_(2 + int(opposite(d)), b) = kNoNeighbor;
}

int Ldi::connection_count() const {
    int n = 0;
    for (int k = 0; k < size(); ++k) n += has_neighbor(k, Dir::Right) + has_neighbor(k, Dir::Down);
    return n;
}

PositionIndex::PositionIndex(const Ldi& ldi) : width_(ldi.width()) {
    const std::size_t cells = std::size_t(ldi.width()) * ldi.height();
    start_.assign(cells + 1, 0);
    for (int k = 0; k < ldi.size(); ++k) ++start_[std::size_t(ldi.y(k)) * width_ + ldi.x(k) + 1];
    for (std::size_t c = 0; c < cells; ++c) start_[c + 1] += start_[c];
    ids_.resize(std::size_t(ldi.size()));
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (int k = 0; k < ldi.size(); ++k) ids_[std::size_t(fill[std::size_t(ldi.y(k)) * width_ + ldi.x(k)]++)] = k;
}

int PositionIndex::max_layers() const {
    int best = 0;
    for (std::size_t c = 0; c + 1 < start_.size(); ++c) best = std::max(best, start_[c + 1] - start_[c]);
    return best;
}

Ldi lift_to_ldi(const Imagef& image, const DisparityImage& disp, float tau_disp) {
    if (image.width() != disp.width() || image.height() != disp.height()) {
        std::ostringstream msg;
        msg << "image is " << image.width() << "x" << image.height() << " but disparity is " << disp.width() << "x"
            << disp.height();
        throw InputError(msg.str());
    }
    if (!(tau_disp > 0.0f && tau_disp < 1.0f)) throw InputError("tau_disp must lie in (0, 1)");

    const int w = image.width();
    const int h = image.height();
    Ldi ldi(w, h, image.channels());
    ldi.reserve_pixels(w * h);
    ldi.values().topRows(image.channels()) = image.data();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int k = y * w + x;
            ldi.index()(0, k) = x;
            ldi.index()(1, k) = y;
            ldi.disparity(k) = disp(x, y);
            ldi.set_known(k, true);
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int k = y * w + x;
            if (x + 1 < w && std::abs(disp(x + 1, y) - disp(x, y)) <= tau_disp) ldi.link(k, Dir::Right, k + 1);
            if (y + 1 < h && std::abs(disp(x, y + 1) - disp(x, y)) <= tau_disp) ldi.link(k, Dir::Down, k + w);
        }
    }
    return ldi;
}

std::vector<Violation> validate(const Ldi& ldi) {
    std::vector<Violation> out;
    const int n = ldi.size();
    if (ldi.index().cols() != n || std::ssize(ldi.mask()) != n) {
        out.push_back({-1, -1, "table sizes disagree"});
        return out;
    }
    for (int k = 0; k < n; ++k) {
        const int x = ldi.x(k);
        const int y = ldi.y(k);
        if (x < 0 || y < 0 || x >= ldi.width() || y >= ldi.height()) {
            out.push_back({k, -1, "position outside lattice"});
            continue;
        }
        const float d = ldi.disparity(k);
        if (!(d >= 0.0f && d <= 1.0f)) out.push_back({k, -1, "disparity outside [0, 1]"});
        for (Dir dir : kAllDirs) {
            const int b = ldi.neighbor(k, dir);
            if (b == kNoNeighbor) continue;
            if (b < 0 || b >= n) {
                out.push_back({k, b, "neighbor id out of range"});
                continue;
            }
            if (ldi.neighbor(b, opposite(dir)) != k) out.push_back({k, b, "asymmetric neighbor link"});
            if (ldi.x(b) != x + dx(dir) || ldi.y(b) != y + dy(dir)) out.push_back({k, b, "neighbor at wrong position"});
        }
    }
    return out;
}

Imagef layer_image(const Ldi& ldi, int layer, const PositionIndex& positions) {
    Imagef img(ldi.width(), ldi.height(), ldi.channels());
    for (int y = 0; y < ldi.height(); ++y)
        for (int x = 0; x < ldi.width(); ++x) {
            const auto ids = positions.at(x, y);
            if (std::ssize(ids) > layer) img.pixel(x, y) = ldi.values().col(ids[std::size_t(layer)]);
        }
    return img;
}

}  // namespace ldiphoto
