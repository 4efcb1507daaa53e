#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ldiphoto/image.hpp"

namespace ldiphoto {

/// Cardinal neighbor directions; the value is the offset into the neighbor rows of the index table.
enum class Dir : int { Left = 0, Right = 1, Up = 2, Down = 3 };

inline constexpr std::array<Dir, 4> kAllDirs = {Dir::Left, Dir::Right, Dir::Up, Dir::Down};

constexpr Dir opposite(Dir d) {
    switch (d) {
        case Dir::Left: return Dir::Right;
        case Dir::Right: return Dir::Left;
        case Dir::Up: return Dir::Down;
        case Dir::Down: return Dir::Up;
    }
    return d;
}

constexpr int dx(Dir d) { return d == Dir::Left ? -1 : d == Dir::Right ? 1 : 0; }
constexpr int dy(Dir d) { return d == Dir::Up ? -1 : d == Dir::Down ? 1 : 0; }

inline constexpr std::int32_t kNoNeighbor = -1;

using IndexTable = Eigen::Matrix<std::int32_t, 6, Eigen::Dynamic>;

/// Layered depth image in tensor form: a C x K value table (color channels then one
/// disparity channel), a 6 x K index table (x, y, left, right, up, down) and a known-color mask.
class Ldi {
public:
    Ldi() = default;
    Ldi(int width, int height, int color_channels);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return int(values_.rows()); }
    int color_channels() const { return channels() - 1; }
    int size() const { return int(values_.cols()); }

    int x(int k) const { return index_(0, k); }
    int y(int k) const { return index_(1, k); }
    std::int32_t neighbor(int k, Dir d) const { return index_(2 + int(d), k); }
    bool has_neighbor(int k, Dir d) const { return neighbor(k, d) != kNoNeighbor; }

    float disparity(int k) const { return values_(channels() - 1, k); }
    float& disparity(int k) { return values_(channels() - 1, k); }
    auto color(int k) { return values_.col(k).head(color_channels()); }
    auto color(int k) const { return values_.col(k).head(color_channels()); }

    bool known(int k) const { return mask_[std::size_t(k)] != 0; }
    void set_known(int k, bool known) { mask_[std::size_t(k)] = known ? 1 : 0; }

    /// Appends a pixel without connections and returns its id.
    int add_pixel(int x, int y, float disparity, bool known);
    /// Appends many unconnected pixels at once; returns the id of the first.
    int reserve_pixels(int count);

    /// Connects a -> b in direction d and b -> a in the opposite direction.
    void link(int a, Dir d, int b);
    void unlink(int a, Dir d);

    /// Raw access for operators and tests; callers keep the invariants.
    Eigen::MatrixXf& values() { return values_; }
    const Eigen::MatrixXf& values() const { return values_; }
    IndexTable& index() { return index_; }
    const IndexTable& index() const { return index_; }
    std::vector<std::uint8_t>& mask() { return mask_; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }

    int connection_count() const;

private:
    int width_ = 0;
    int height_ = 0;
    Eigen::MatrixXf values_;
    IndexTable index_;
    std::vector<std::uint8_t> mask_;
};

/// Lattice position -> pixel ids at that position, in id order.
class PositionIndex {
public:
    explicit PositionIndex(const Ldi& ldi);
    std::span<const int> at(int x, int y) const {
        const std::size_t cell = std::size_t(y) * width_ + x;
        return {ids_.data() + start_[cell], ids_.data() + start_[cell + 1]};
    }
    int max_layers() const;

private:
    int width_;
    std::vector<int> start_;
    std::vector<int> ids_;
};

/// Single-layer LDI from a color image and disparity, connected wherever the
/// disparity step between 4-neighbors is at most tau_disp. All colors known.
Ldi lift_to_ldi(const Imagef& image, const DisparityImage& disp, float tau_disp);

struct Violation {
    int pixel;
    int other;  // second pixel involved, or -1
    std::string what;
};

/// Lists every broken structural invariant; empty when the LDI is well formed.
std::vector<Violation> validate(const Ldi& ldi);

/// Dense per-position layer view: layer l of position (x, y) is the l-th pixel in id order.
Imagef layer_image(const Ldi& ldi, int layer, const PositionIndex& positions);

}  // namespace ldiphoto
