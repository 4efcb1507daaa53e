#include "ldiphoto/metrics.hpp"

#include <cmath>
#include <limits>

namespace ldiphoto {

namespace {

void check_same(const Imagef& a, const Imagef& b) {
    if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels())
        throw InputError("metric inputs differ in size");
}

// Separable clipped Gaussian blur, renormalized by the in-frame weight.
Imaged blur(const Imaged& src, const Eigen::VectorXd& kernel) {
    const int r = int(kernel.size()) / 2;
    const int w = src.width();
    const int h = src.height();
    Imaged tmp(w, h, 1), out(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0, n = 0;
            for (int i = -r; i <= r; ++i) {
                if (x + i < 0 || x + i >= w) continue;
                s += kernel(i + r) * src(x + i, y);
                n += kernel(i + r);
            }
            tmp(x, y) = s / n;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0, n = 0;
            for (int i = -r; i <= r; ++i) {
                if (y + i < 0 || y + i >= h) continue;
                s += kernel(i + r) * tmp(x, y + i);
                n += kernel(i + r);
            }
            out(x, y) = s / n;
        }
    return out;
}

}  // namespace

double psnr_from_mse(double mse) {
    if (mse <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double psnr(const Imagef& a, const Imagef& b, const std::vector<std::uint8_t>& mask) {
    check_same(a, b);
    double sum = 0;
    long count = 0;
    for (Eigen::Index p = 0; p < a.pixel_count(); ++p) {
        if (!mask.empty() && !mask[std::size_t(p)]) continue;
        sum += (a.data().col(p) - b.data().col(p)).cast<double>().squaredNorm();
        count += a.channels();
    }
    if (count == 0) return std::numeric_limits<double>::quiet_NaN();
    return psnr_from_mse(sum / double(count));
}

Imaged ssim_map(const Imagef& a, const Imagef& b) {
    check_same(a, b);
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    Eigen::VectorXd kernel(11);
    for (int i = 0; i < 11; ++i) kernel(i) = std::exp(-double((i - 5) * (i - 5)) / (2 * 1.5 * 1.5));
    kernel /= kernel.sum();

    const int w = a.width();
    const int h = a.height();
    Imaged out(w, h, 1);
    for (int c = 0; c < a.channels(); ++c) {
        Imaged x(w, h, 1), y(w, h, 1), xx(w, h, 1), yy(w, h, 1), xy(w, h, 1);
        x.data() = a.data().row(c).cast<double>();
        y.data() = b.data().row(c).cast<double>();
        xx.data() = x.data().cwiseProduct(x.data());
        yy.data() = y.data().cwiseProduct(y.data());
        xy.data() = x.data().cwiseProduct(y.data());
        const Imaged mx = blur(x, kernel), my = blur(y, kernel);
        const Imaged sxx = blur(xx, kernel), syy = blur(yy, kernel), sxy = blur(xy, kernel);
        for (Eigen::Index p = 0; p < out.pixel_count(); ++p) {
            const double ux = mx.data()(0, p), uy = my.data()(0, p);
            const double vx = sxx.data()(0, p) - ux * ux;
            const double vy = syy.data()(0, p) - uy * uy;
            const double cov = sxy.data()(0, p) - ux * uy;
            out.data()(0, p) += ((2 * ux * uy + c1) * (2 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
        }
    }
    out.data() /= double(a.channels());
    return out;
}

double ssim(const Imagef& a, const Imagef& b, const std::vector<std::uint8_t>& mask) {
    const Imaged map = ssim_map(a, b);
    double sum = 0;
    long count = 0;
    for (Eigen::Index p = 0; p < map.pixel_count(); ++p) {
        if (!mask.empty() && !mask[std::size_t(p)]) continue;
        sum += map.data()(0, p);
        ++count;
    }
    return count ? sum / double(count) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace ldiphoto
