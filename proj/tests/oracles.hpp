#pragma once

// Independent brute-force references shared by the unit tests and the acceptance run.

#include <Eigen/Core>

#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <vector>

#include "ldiphoto/image.hpp"
#include "ldiphoto/ldi.hpp"
#include "ldiphoto/nn/ldi_ops.hpp"

namespace oracle {

using namespace ldiphoto;

/// Weighted median of the clipped window around (x, y) by explicit O(n^2) rank counting.
inline float weighted_median(const DisparityImage& d, int x, int y, int k, float sigma, float tau) {
    const int r = k / 2;
    auto near_edge = [&](int px, int py) {
        const int n[4][2] = {{px - 1, py}, {px + 1, py}, {px, py - 1}, {px, py + 1}};
        for (const auto& q : n)
            if (d.contains(q[0], q[1]) && std::abs(d(q[0], q[1]) - d(px, py)) > tau) return true;
        return false;
    };
    std::vector<float> v;
    std::vector<double> wt;
    for (int wy = y - r; wy <= y + r; ++wy)
        for (int wx = x - r; wx <= x + r; ++wx) {
            if (!d.contains(wx, wy)) continue;
            const double diff = double(d(wx, wy)) - d(x, y);
            v.push_back(d(wx, wy));
            wt.push_back(near_edge(wx, wy) ? 0.0 : std::exp(-diff * diff / (2.0 * sigma * sigma)));
        }
    const std::size_t n = v.size();
    double total = 0;
    for (double w : wt) total += w;
    // rank of i in a stable sort by value
    auto rank = [&](std::size_t i) {
        std::size_t r = 0;
        for (std::size_t j = 0; j < n; ++j) r += (v[j] < v[i] || (v[j] == v[i] && j < i)) ? 1 : 0;
        return r;
    };
    if (total <= 0) {
        for (std::size_t i = 0; i < n; ++i)
            if (rank(i) == (n - 1) / 2) return v[i];
    }
    double best = INFINITY;
    std::size_t best_rank = n;
    float pick = v[0];
    for (std::size_t i = 0; i < n; ++i) {
        if (wt[i] <= 0) continue;
        double before = 0;
        const std::size_t ri = rank(i);
        for (std::size_t j = 0; j < n; ++j)
            if (rank(j) < ri) before += wt[j];
        const double gap = std::abs(before - (total - before - wt[i]));
        if (gap < best || (gap == best && ri < best_rank)) {
            best = gap;
            best_rank = ri;
            pick = v[i];
        }
    }
    return pick;
}

/// Sizes of all 4-connected components with |d(p) - d(q)| <= tau, by flood fill.
inline std::vector<int> component_sizes(const DisparityImage& d, float tau) {
    const int w = d.width(), h = d.height();
    std::vector<int> seen(std::size_t(w) * h, 0), sizes;
    for (int s = 0; s < w * h; ++s) {
        if (seen[std::size_t(s)]) continue;
        std::deque<int> q{s};
        seen[std::size_t(s)] = 1;
        int n = 0;
        while (!q.empty()) {
            const int p = q.front();
            q.pop_front();
            ++n;
            const int px = p % w, py = p / w;
            const int nb[4][2] = {{px - 1, py}, {px + 1, py}, {px, py - 1}, {px, py + 1}};
            for (const auto& c : nb) {
                if (!d.contains(c[0], c[1])) continue;
                const int qi = c[1] * w + c[0];
                if (!seen[std::size_t(qi)] && std::abs(d(c[0], c[1]) - d(px, py)) <= tau) {
                    seen[std::size_t(qi)] = 1;
                    q.push_back(qi);
                }
            }
        }
        sizes.push_back(n);
    }
    return sizes;
}

/// Kernel neighborhood materialized by a breadth-first walk over links (up, down, left, right),
/// addressing slots by the accumulated lattice offset. Returns slot -> pixel (-1 empty).
inline std::map<std::pair<int, int>, int> neighborhood(const nn::LdiGraph& g, int center, int k) {
    const int r = k / 2;
    std::map<std::pair<int, int>, int> slot{{{0, 0}, center}};
    std::deque<std::tuple<int, int, int>> q{{center, 0, 0}};
    const Dir order[4] = {Dir::Up, Dir::Down, Dir::Left, Dir::Right};
    while (!q.empty()) {
        const auto [p, ox, oy] = q.front();
        q.pop_front();
        for (Dir d : order) {
            const int n = g.neighbor(p, d);
            const int nx = ox + dx(d), ny = oy + dy(d);
            if (n < 0 || std::abs(nx) > r || std::abs(ny) > r || slot.count({nx, ny})) continue;
            slot[{nx, ny}] = n;
            q.push_back({n, nx, ny});
        }
    }
    return slot;
}

/// Partial convolution of one output pixel from its materialized neighborhood, in double.
inline Eigen::VectorXd partial_conv_at(const nn::LdiGraph& g, const Eigen::MatrixXf& x, const Eigen::RowVectorXf& m,
                                       const nn::KernelSpec& spec, int center, bool* valid) {
    const int r = spec.k / 2;
    const auto slots = neighborhood(g, center, spec.k);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(spec.out_channels);
    double msum = 0;
    for (const auto& [off, p] : slots) {
        msum += m[p];
        for (int o = 0; o < spec.out_channels; ++o)
            for (int i = 0; i < spec.in_channels; ++i)
                acc[o] += double(spec.w(o, i, off.second + r, off.first + r)) * x(i, p) * m[p];
    }
    *valid = msum > 0;
    if (!*valid) return Eigen::VectorXd::Zero(spec.out_channels);
    return acc * (double(spec.k * spec.k) / msum) + spec.bias.cast<double>();
}

/// Coarse edges (retained a -> retained b, direction) from every two-step fine path whose
/// endpoints are two lattice cells apart along one axis.
inline std::set<std::tuple<int, int, int>> two_step_edges(const nn::LdiGraph& g) {
    std::set<std::tuple<int, int, int>> edges;
    auto retained = [&](int p) { return g.index(0, p) % 2 == 0 && g.index(1, p) % 2 == 0; };
    for (int a = 0; a < g.size(); ++a) {
        if (!retained(a)) continue;
        for (Dir d1 : kAllDirs) {
            const int m = g.neighbor(a, d1);
            if (m < 0) continue;
            for (Dir d2 : kAllDirs) {
                const int b = g.neighbor(m, d2);
                if (b < 0 || !retained(b)) continue;
                const int ddx = g.index(0, b) - g.index(0, a), ddy = g.index(1, b) - g.index(1, a);
                if (std::abs(ddx) + std::abs(ddy) != 2 || (ddx != 0 && ddy != 0)) continue;
                const Dir d = ddx > 0 ? Dir::Right : ddx < 0 ? Dir::Left : ddy > 0 ? Dir::Down : Dir::Up;
                edges.insert({a, int(d), b});
            }
        }
    }
    return edges;
}

}  // namespace oracle
