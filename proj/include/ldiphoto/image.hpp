#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>

#include "ldiphoto/error.hpp"

namespace ldiphoto {

/// Dense multi-channel image stored channel-major: one column per pixel,
/// pixel (x, y) at column y * width + x.
template <typename Scalar>
class Image {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Image() = default;
    Image(int width, int height, int channels)
        : width_(width), height_(height), data_(Matrix::Zero(channels, Eigen::Index(width) * height)) {}

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return int(data_.rows()); }
    Eigen::Index pixel_count() const { return data_.cols(); }

    Eigen::Index index(int x, int y) const { return Eigen::Index(y) * width_ + x; }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    Scalar& operator()(int x, int y, int c = 0) { return data_(c, index(x, y)); }
    Scalar operator()(int x, int y, int c = 0) const { return data_(c, index(x, y)); }

    auto pixel(int x, int y) { return data_.col(index(x, y)); }
    auto pixel(int x, int y) const { return data_.col(index(x, y)); }

    Matrix& data() { return data_; }
    const Matrix& data() const { return data_; }

private:
    int width_ = 0;
    int height_ = 0;
    Matrix data_;
};

using Imagef = Image<float>;
using Imaged = Image<double>;

/// Per-pixel normalized disparity in [0, 1]; 1 is nearest.
class DisparityImage {
public:
    using Array = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    DisparityImage() = default;

    /// Throws InputError unless the size is at least 8x8 and every value is finite in [0, 1].
    explicit DisparityImage(Array values);

    static DisparityImage constant(int width, int height, float d);

    int width() const { return int(values_.cols()); }
    int height() const { return int(values_.rows()); }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width() && y < height(); }

    float operator()(int x, int y) const { return values_(y, x); }
    const Array& values() const { return values_; }

private:
    Array values_;
};

inline DisparityImage::DisparityImage(Array values) : values_(std::move(values)) {
    if (values_.cols() < 8 || values_.rows() < 8) {
        throw InputError("disparity image must be at least 8x8");
    }
    if (!values_.allFinite() || (values_ < 0.0f).any() || (values_ > 1.0f).any()) {
        throw InputError("disparity values must be finite and within [0, 1]");
    }
}

inline DisparityImage DisparityImage::constant(int width, int height, float d) {
    return DisparityImage(Array::Constant(height, width, d));
}

/// Bilinear resampling with pixel-center alignment.
template <typename Scalar>
Image<Scalar> resize_bilinear(const Image<Scalar>& src, int width, int height) {
    Image<Scalar> dst(width, height, src.channels());
    const double sx = double(src.width()) / width;
    const double sy = double(src.height()) / height;
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, double(src.height() - 1));
        const int y0 = int(fy);
        const int y1 = std::min(y0 + 1, src.height() - 1);
        const double ty = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, double(src.width() - 1));
            const int x0 = int(fx);
            const int x1 = std::min(x0 + 1, src.width() - 1);
            const double tx = fx - x0;
            for (int c = 0; c < src.channels(); ++c) {
                const double top = (1 - tx) * src(x0, y0, c) + tx * src(x1, y0, c);
                const double bottom = (1 - tx) * src(x0, y1, c) + tx * src(x1, y1, c);
                dst(x, y, c) = Scalar((1 - ty) * top + ty * bottom);
            }
        }
    }
    return dst;
}

inline Imagef to_image(const DisparityImage& disp) {
    Imagef img(disp.width(), disp.height(), 1);
    for (int y = 0; y < disp.height(); ++y)
        for (int x = 0; x < disp.width(); ++x) img(x, y) = disp(x, y);
    return img;
}

inline DisparityImage to_disparity(const Imagef& img) {
    DisparityImage::Array values(img.height(), img.width());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) values(y, x) = std::clamp(img(x, y), 0.0f, 1.0f);
    return DisparityImage(std::move(values));
}

}  // namespace ldiphoto
