#include "ldiphoto/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ldiphoto/error.hpp"

namespace ldiphoto {

SyntheticDepth parse_synthetic_depth(const std::string& name) {
    if (name == "gradient") return SyntheticDepth::Gradient;
    if (name == "constant") return SyntheticDepth::Constant;
    if (name == "steps") return SyntheticDepth::Steps;
    throw InputError("unknown synthetic depth '" + name + "' (gradient, constant, steps)");
}

DisparityImage synthetic_depth(SyntheticDepth kind, int width, int height) {
    DisparityImage::Array d(height, width);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const float u = width > 1 ? float(x) / float(width - 1) : 0.0f;
            switch (kind) {
                case SyntheticDepth::Gradient: d(y, x) = 0.2f + 0.6f * u; break;
                case SyntheticDepth::Constant: d(y, x) = 0.5f; break;
                case SyntheticDepth::Steps: d(y, x) = x < width / 3 ? 0.2f : x < 2 * width / 3 ? 0.5f : 0.8f; break;
            }
        }
    return DisparityImage(std::move(d));
}

namespace {

std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

float lattice(std::uint32_t seed, int octave, int ix, int iy) {
    const std::uint64_t h = mix(mix(mix(seed) ^ std::uint64_t(octave)) ^ (std::uint64_t(std::uint32_t(ix)) << 32 | std::uint32_t(iy)));
    return float(double(h >> 11) / double(1ull << 53)) * 2.0f - 1.0f;
}

float smooth(float t) { return t * t * (3.0f - 2.0f * t); }

struct Shape {
    bool disc = false;
    double u0, v0, u1, v1;  // normalized bounds
    float lift;             // disparity added to the table under its base
    Eigen::Vector3f color;
};

struct Layout {
    double horizon;
    float wall_near, wall_far, table_far, table_near;
    Eigen::Vector3f wall, table;
    std::vector<Shape> shapes;
    bool three_depth = false;
    std::uint32_t seed;
};

Layout make_layout(int index) {
    Layout L;
    L.seed = 7919u * std::uint32_t(index) + 17u;
    if (index == 0) {
        L.three_depth = true;
        L.horizon = 0;
        L.wall_near = L.wall_far = L.table_far = L.table_near = 0;
        L.wall = {0.55f, 0.62f, 0.75f};
        L.table = {0.72f, 0.55f, 0.38f};
        L.shapes.push_back({false, 0.25, 0.25, 0.75, 0.75, 0.0f, {0.85f, 0.25f, 0.2f}});
        return L;
    }
    std::mt19937 rng(L.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    L.horizon = 0.3 + 0.2 * U(rng);
    L.wall_far = 0.10f + 0.05f * float(U(rng));
    L.wall_near = L.wall_far + 0.03f;
    L.table_far = L.wall_near + 0.12f + 0.06f * float(U(rng));
    L.table_near = L.table_far + 0.25f + 0.1f * float(U(rng));
    L.wall = {0.45f + 0.4f * float(U(rng)), 0.45f + 0.4f * float(U(rng)), 0.45f + 0.4f * float(U(rng))};
    L.table = {0.45f + 0.3f * float(U(rng)), 0.3f + 0.2f * float(U(rng)), 0.15f + 0.15f * float(U(rng))};
    const int count = 2 + int(U(rng) * 3);
    for (int i = 0; i < count; ++i) {
        Shape s;
        s.disc = U(rng) < 0.4;
        const double w = 0.1 + 0.2 * U(rng);
        const double base = L.horizon + 0.1 + (0.85 - L.horizon) * U(rng);
        const double h = s.disc ? w * 0.9 : 0.15 + 0.3 * U(rng);
        s.u0 = 0.05 + (0.9 - w) * U(rng);
        s.u1 = s.u0 + w;
        s.v1 = base;
        s.v0 = base - h;
        s.lift = 0.1f + 0.15f * float(U(rng));
        s.color = {float(U(rng)), float(U(rng)), float(U(rng))};
        L.shapes.push_back(s);
    }
    // nearer bases are drawn later so they occlude
    std::stable_sort(L.shapes.begin(), L.shapes.end(), [](const Shape& a, const Shape& b) { return a.v1 < b.v1; });
    return L;
}

float table_disparity(const Layout& L, double v) {
    const double t = std::clamp((v - L.horizon) / (1.0 - L.horizon), 0.0, 1.0);
    return float(L.table_far + (L.table_near - L.table_far) * t);
}

bool inside(const Shape& s, double u, double v) {
    if (!s.disc) return u >= s.u0 && u < s.u1 && v >= s.v0 && v < s.v1;
    const double cu = 0.5 * (s.u0 + s.u1), cv = 0.5 * (s.v0 + s.v1);
    const double ru = 0.5 * (s.u1 - s.u0), rv = 0.5 * (s.v1 - s.v0);
    const double a = (u - cu) / ru, b = (v - cv) / rv;
    return a * a + b * b < 1.0;
}

// label: 0 wall, 1 table, 2 + i shape i; three-depth layout: 0 far, 1 mid, 2 near
int region(const Layout& L, double u, double v, float& d) {
    if (L.three_depth) {
        if (inside(L.shapes[0], u, v)) {
            d = 0.8f;
            return 2;
        }
        d = u < 0.5 ? 0.5f : 0.2f;
        return u < 0.5 ? 1 : 0;
    }
    int label;
    if (v < L.horizon) {
        d = float(L.wall_far + (L.wall_near - L.wall_far) * v / L.horizon);
        label = 0;
    } else {
        d = table_disparity(L, v);
        label = 1;
    }
    for (std::size_t i = 0; i < L.shapes.size(); ++i)
        if (inside(L.shapes[i], u, v)) {
            d = std::min(0.98f, table_disparity(L, L.shapes[i].v1) + L.shapes[i].lift);
            label = 2 + int(i);
        }
    return label;
}

DisparityImage render_disparity(const Layout& L, int w, int h) {
    DisparityImage::Array d(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) region(L, (x + 0.5) / w, (y + 0.5) / h, d(y, x));
    return DisparityImage(std::move(d));
}

Imagef render_color(const Layout& L, int w, int h) {
    const double period = 0.25 * std::max(w, h);
    const Eigen::ArrayXXf lum = fractal_noise(w, h, L.seed ^ 0xA5A5u, 6, period);
    const Eigen::ArrayXXf grain = fractal_noise(w, h, L.seed ^ 0x5A5Au, 3, std::max(4.0, period / 32));
    const Eigen::ArrayXXf hue = fractal_noise(w, h, L.seed ^ 0x3C3Cu, 4, period);
    Imagef img(w, h, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double u = (x + 0.5) / w, v = (y + 0.5) / h;
            float d;
            const int label = region(L, u, v, d);
            Eigen::Vector3f base;
            float shade;
            if (label == 0) {
                base = L.wall;
                shade = 1.0f - 0.25f * float(u);
            } else if (label == 1) {
                base = L.table;
                const double ring = std::sin(2 * std::numbers::pi * (u * 9 + 1.5 * lum(y, x)));
                shade = 0.9f + 0.08f * float(ring) + 0.1f * float(v);
            } else {
                const Shape& s = L.shapes[std::size_t(label - 2)];
                base = s.color;
                shade = 0.7f + 0.45f * float((u - s.u0) / std::max(1e-6, s.u1 - s.u0));
            }
            Eigen::Vector3f c = base * shade;
            c.array() += 0.06f * lum(y, x) + 0.02f * grain(y, x);
            c.x() += 0.03f * hue(y, x);
            c.z() -= 0.03f * hue(y, x);
            img.pixel(x, y) = c.cwiseMax(0.0f).cwiseMin(1.0f);
        }
    return img;
}

}  // namespace

Eigen::ArrayXXf fractal_noise(int width, int height, std::uint32_t seed, int octaves, double period) {
    Eigen::ArrayXXf out = Eigen::ArrayXXf::Zero(height, width);
    float amplitude = 1.0f, total = 0.0f;
    for (int o = 0; o < octaves; ++o) {
        const double p = std::max(1.0, period / double(1 << o));
        for (int y = 0; y < height; ++y) {
            const double fy = y / p;
            const int iy = int(std::floor(fy));
            const float ty = smooth(float(fy - iy));
            for (int x = 0; x < width; ++x) {
                const double fx = x / p;
                const int ix = int(std::floor(fx));
                const float tx = smooth(float(fx - ix));
                const float a = lattice(seed, o, ix, iy), b = lattice(seed, o, ix + 1, iy);
                const float c = lattice(seed, o, ix, iy + 1), d = lattice(seed, o, ix + 1, iy + 1);
                out(y, x) += amplitude * ((a + (b - a) * tx) * (1 - ty) + (c + (d - c) * tx) * ty);
            }
        }
        total += amplitude;
        amplitude *= 0.5f;
    }
    return out / std::max(total, 1e-6f);
}

Scene desk_scene(int index, int width, int height) {
    const Layout L = make_layout(index);
    return {"desk_" + std::to_string(index), render_color(L, width, height), render_disparity(L, width, height)};
}

std::vector<Scene> desk_corpus(int count, int width, int height) {
    std::vector<Scene> scenes;
    for (int i = 0; i < count; ++i) scenes.push_back(desk_scene(i, width, height));
    return scenes;
}

Scene teaser_scene(int width, int height) {
    const Layout L = make_layout(3);
    return {"teaser", render_color(L, width, height), render_disparity(L, std::max(8, width / 4), std::max(8, height / 4))};
}

}  // namespace ldiphoto
