#include "ldiphoto/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>

#include "ldiphoto/parallel.hpp"

namespace ldiphoto {

int round_up16(int v) { return (v + 15) / 16 * 16; }

std::vector<std::uint8_t> edge_excluded_pixels(const Ldi& ldi, int range, float tau_disp) {
    std::vector<std::uint8_t> excluded(std::size_t(ldi.size()), 0);
    if (range <= 0) return excluded;
    const PositionIndex positions(ldi);
    for (int f = 0; f < ldi.size(); ++f) {
        for (Dir d : kAllDirs) {
            if (ldi.has_neighbor(f, d)) continue;
            const int qx = ldi.x(f) + dx(d);
            const int qy = ldi.y(f) + dy(d);
            if (qx < 0 || qy < 0 || qx >= ldi.width() || qy >= ldi.height()) continue;
            for (int q : positions.at(qx, qy)) {
                if (ldi.disparity(f) - ldi.disparity(q) <= tau_disp) continue;
                int cur = q;
                for (int i = 0; i < range && cur >= 0; ++i) {
                    excluded[std::size_t(cur)] = 1;
                    cur = ldi.neighbor(cur, d);
                }
            }
        }
    }
    return excluded;
}

std::vector<Chart> generate_charts(const Ldi& ldi, const AtlasParams& params, std::vector<int>* chart_of_pixel) {
    const int w = ldi.width();
    const int h = ldi.height();
    const auto excluded = edge_excluded_pixels(ldi, params.edge_exclusion, params.tau_disp);
    std::vector<int> chart_of(std::size_t(ldi.size()), -1);
    std::vector<int> cell_chart(std::size_t(w) * h, -1);  // last chart with a member in the cell
    std::vector<int> cell_pixel(std::size_t(w) * h, -1);  // that member
    std::vector<Chart> charts;
    std::deque<int> queue;

    for (int seed = 0; seed < ldi.size(); ++seed) {
        if (chart_of[std::size_t(seed)] >= 0) continue;
        Chart c;
        c.id = int(charts.size());
        c.excluded = excluded[std::size_t(seed)] != 0;
        c.x0 = c.x1 = ldi.x(seed);
        c.y0 = c.y1 = ldi.y(seed);
        auto member = [&](int x, int y) {
            return x >= 0 && y >= 0 && x < w && y < h && cell_chart[std::size_t(y) * w + x] == c.id;
        };
        auto admissible = [&](int k) {
            const int x = ldi.x(k);
            const int y = ldi.y(k);
            if (member(x, y)) return false;
            if (std::max(c.x1, x + 1) - std::min(c.x0, x) > params.max_chart_size) return false;
            if (std::max(c.y1, y + 1) - std::min(c.y0, y) > params.max_chart_size) return false;
            for (int oy : {-1, 1})
                for (int ox : {-1, 1})
                    if (member(x + ox, y + oy) && !member(x + ox, y) && !member(x, y + oy)) return false;
            // No cut edges inside a chart: every lattice-adjacent member must be linked.
            for (Dir d : kAllDirs)
                if (member(x + dx(d), y + dy(d)) &&
                    ldi.neighbor(k, d) != cell_pixel[std::size_t(y + dy(d)) * w + x + dx(d)])
                    return false;
            return true;
        };
        auto add = [&](int k) {
            const int x = ldi.x(k);
            const int y = ldi.y(k);
            chart_of[std::size_t(k)] = c.id;
            cell_chart[std::size_t(y) * w + x] = c.id;
            cell_pixel[std::size_t(y) * w + x] = k;
            c.pixels.push_back(k);
            c.x0 = std::min(c.x0, x);
            c.y0 = std::min(c.y0, y);
            c.x1 = std::max(c.x1, x + 1);
            c.y1 = std::max(c.y1, y + 1);
            queue.push_back(k);
        };
        add(seed);
        while (!queue.empty()) {
            const int m = queue.front();
            queue.pop_front();
            for (Dir d : kAllDirs) {
                const int n = ldi.neighbor(m, d);
                if (n < 0 || chart_of[std::size_t(n)] >= 0 || (excluded[std::size_t(n)] != 0) != c.excluded) continue;
                if (admissible(n)) add(n);
            }
        }
        charts.push_back(std::move(c));
    }
    if (chart_of_pixel) *chart_of_pixel = std::move(chart_of);
    return charts;
}

namespace {

// Gauss-Seidel / SOR over `cells` of a grid; `fixed` cells are boundary values. Unknown cells
// start from the nearest fixed value. Neighbors outside `inside` are ignored.
void diffuse_grid(Imagef& img, const std::vector<std::uint8_t>& fixed, const std::vector<std::uint8_t>& unknown,
                  int x0, int y0, int x1, int y1, float omega, int max_iterations, float tolerance) {
    const int w = img.width();
    auto id = [&](int x, int y) { return std::size_t(y) * w + x; };
    std::vector<std::uint8_t> seen(fixed.size(), 0);
    std::deque<std::pair<int, int>> queue;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
            if (fixed[id(x, y)]) {
                seen[id(x, y)] = 1;
                queue.push_back({x, y});
            }
    std::vector<std::pair<int, int>> order;
    while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
        for (const auto& q : nb) {
            if (q[0] < x0 || q[1] < y0 || q[0] >= x1 || q[1] >= y1) continue;
            const std::size_t qi = id(q[0], q[1]);
            if (seen[qi] || !unknown[qi]) continue;
            seen[qi] = 1;
            img.pixel(q[0], q[1]) = img.pixel(x, y);
            queue.push_back({q[0], q[1]});
            order.push_back({q[0], q[1]});
        }
    }
    if (order.empty()) return;
    std::sort(order.begin(), order.end(), [](auto a, auto b) { return std::tie(a.second, a.first) < std::tie(b.second, b.first); });
    const int channels = img.channels();
    Eigen::VectorXf sum(channels);
    for (int iter = 0; iter < max_iterations; ++iter) {
        float change = 0.0f;
        for (const auto& [x, y] : order) {
            sum.setZero();
            int n = 0;
            const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
            for (const auto& q : nb) {
                if (q[0] < x0 || q[1] < y0 || q[0] >= x1 || q[1] >= y1) continue;
                const std::size_t qi = id(q[0], q[1]);
                if (!seen[qi]) continue;
                sum += img.pixel(q[0], q[1]);
                ++n;
            }
            if (n == 0) continue;
            const Eigen::VectorXf old = img.pixel(x, y);
            const Eigen::VectorXf next = old + omega * (sum / float(n) - old);
            img.pixel(x, y) = next.cwiseMax(0.0f).cwiseMin(1.0f);
            change = std::max(change, (next - old).cwiseAbs().maxCoeff());
        }
        if (change < tolerance) break;
    }
}

}  // namespace

std::vector<PaddedChart> pad_charts(const std::vector<Chart>& charts, const Ldi& ldi, int pad,
                                    const std::vector<int>& chart_of_pixel) {
    std::vector<PaddedChart> out(charts.size());
    const int channels = ldi.color_channels();
    parallel_for(0, long(charts.size()), [&](long ci) {
        const Chart& c = charts[std::size_t(ci)];
        PaddedChart& p = out[std::size_t(ci)];
        p.chart = c.id;
        p.origin = Eigen::Vector2i(c.x0 - pad, c.y0 - pad);
        p.width = c.width() + 2 * pad;
        p.height = c.height() + 2 * pad;
        const std::size_t cells = std::size_t(p.width) * p.height;
        p.classes.assign(cells, AtlasClass::Empty);
        p.member.assign(cells, -1);
        p.colors = Imagef(p.width, p.height, channels);
        auto local = [&](int k) -> long {
            const int lx = ldi.x(k) - p.origin.x();
            const int ly = ldi.y(k) - p.origin.y();
            if (lx < 0 || ly < 0 || lx >= p.width || ly >= p.height) return -1;
            return long(ly) * p.width + lx;
        };

        // Ring cells: Chebyshev distance <= pad from a member (separable dilation).
        std::vector<std::uint8_t> mem(cells, 0), tmp(cells, 0), ring(cells, 0);
        for (int k : c.pixels) {
            const long i = local(k);
            p.classes[std::size_t(i)] = AtlasClass::Member;
            p.member[std::size_t(i)] = k;
            p.colors.data().col(i) = ldi.color(k);
            mem[std::size_t(i)] = 1;
        }
        for (int y = 0; y < p.height; ++y)
            for (int x = 0; x < p.width; ++x) {
                bool any = false;
                for (int i = std::max(0, x - pad); i <= std::min(p.width - 1, x + pad) && !any; ++i)
                    any = mem[std::size_t(y) * p.width + i];
                tmp[std::size_t(y) * p.width + x] = any;
            }
        for (int y = 0; y < p.height; ++y)
            for (int x = 0; x < p.width; ++x) {
                bool any = false;
                for (int i = std::max(0, y - pad); i <= std::min(p.height - 1, y + pad) && !any; ++i)
                    any = tmp[std::size_t(i) * p.width + x];
                ring[std::size_t(y) * p.width + x] = any && !mem[std::size_t(y) * p.width + x];
            }

        // Copy what the LDI continues with across the chart boundary.
        std::deque<std::pair<int, int>> queue;
        for (int k : c.pixels) queue.push_back({k, 0});
        while (!queue.empty()) {
            const auto [k, dist] = queue.front();
            queue.pop_front();
            if (dist >= pad) continue;
            for (Dir d : kAllDirs) {
                const int n = ldi.neighbor(k, d);
                if (n < 0 || chart_of_pixel[std::size_t(n)] == c.id) continue;
                const long i = local(n);
                if (i < 0 || !ring[std::size_t(i)] || p.classes[std::size_t(i)] != AtlasClass::Empty) continue;
                p.classes[std::size_t(i)] = AtlasClass::PadCopy;
                p.colors.data().col(i) = ldi.color(n);
                queue.push_back({n, dist + 1});
            }
        }

        std::vector<std::uint8_t> fixed(cells, 0), unknown(cells, 0);
        for (std::size_t i = 0; i < cells; ++i) {
            if (p.classes[i] != AtlasClass::Empty) fixed[i] = 1;
            else if (ring[i]) {
                unknown[i] = 1;
                p.classes[i] = AtlasClass::PadDiffuse;
            }
        }
        diffuse_grid(p.colors, fixed, unknown, 0, 0, p.width, p.height, 1.0f, 500, 1e-4f);
    });
    return out;
}

namespace {

struct PackNode {
    int x, y, w, h;
    int child[2] = {-1, -1};
    bool used = false;
};

class TreePacker {
public:
    TreePacker(int w, int h) { nodes_.push_back({0, 0, w, h}); }

    bool insert(int rw, int rh, Eigen::Vector2i& at) { return insert(0, rw, rh, at); }

private:
    bool insert(int n, int rw, int rh, Eigen::Vector2i& at) {
        if (nodes_[std::size_t(n)].child[0] >= 0) {
            const int c0 = nodes_[std::size_t(n)].child[0];
            const int c1 = nodes_[std::size_t(n)].child[1];
            return insert(c0, rw, rh, at) || insert(c1, rw, rh, at);
        }
        const PackNode node = nodes_[std::size_t(n)];
        if (node.used || rw > node.w || rh > node.h) return false;
        if (rw == node.w && rh == node.h) {
            nodes_[std::size_t(n)].used = true;
            at = Eigen::Vector2i(node.x, node.y);
            return true;
        }
        PackNode a, b;
        if (node.w - rw > node.h - rh) {
            a = {node.x, node.y, rw, node.h};
            b = {node.x + rw, node.y, node.w - rw, node.h};
        } else {
            a = {node.x, node.y, node.w, rh};
            b = {node.x, node.y + rh, node.w, node.h - rh};
        }
        nodes_.push_back(a);
        nodes_.push_back(b);
        nodes_[std::size_t(n)].child[0] = int(nodes_.size()) - 2;
        nodes_[std::size_t(n)].child[1] = int(nodes_.size()) - 1;
        return insert(int(nodes_.size()) - 2, rw, rh, at);
    }

    std::vector<PackNode> nodes_;
};

}  // namespace

AtlasLayout pack_charts(const std::vector<Eigen::Vector2i>& sizes, int max_atlas_size) {
    AtlasLayout layout;
    layout.offsets.assign(sizes.size(), Eigen::Vector2i::Zero());
    if (sizes.empty()) {
        layout.width = layout.height = 16;
        return layout;
    }
    int max_w = 0, max_h = 0;
    double area = 0;
    for (const auto& s : sizes) {
        if (s.x() > max_atlas_size || s.y() > max_atlas_size) throw InputError("chart larger than the maximum atlas");
        max_w = std::max(max_w, s.x());
        max_h = std::max(max_h, s.y());
        area += double(s.x()) * s.y();
    }
    const int side = int(std::ceil(std::sqrt(area)));
    int aw = round_up16(std::max(max_w, side));
    int ah = round_up16(std::max(max_h, side));

    std::vector<int> order(sizes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sizes[std::size_t(a)].y() > sizes[std::size_t(b)].y(); });

    for (;;) {
        ++layout.attempts;
        TreePacker packer(aw, ah);
        bool ok = true;
        for (int i : order) {
            if (!packer.insert(sizes[std::size_t(i)].x(), sizes[std::size_t(i)].y(), layout.offsets[std::size_t(i)])) {
                ok = false;
                break;
            }
        }
        if (ok) break;
        if (aw <= ah) aw *= 2;
        else ah *= 2;
        if (aw > max_atlas_size || ah > max_atlas_size) throw InputError("charts do not fit the maximum atlas size");
    }
    int used_w = 0, used_h = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        used_w = std::max(used_w, layout.offsets[i].x() + sizes[i].x());
        used_h = std::max(used_h, layout.offsets[i].y() + sizes[i].y());
    }
    layout.width = round_up16(used_w);
    layout.height = round_up16(used_h);
    return layout;
}

Imagef render_atlas(AtlasLayout& layout, const std::vector<PaddedChart>& padded) {
    const int channels = padded.empty() ? 3 : padded.front().colors.channels();
    Imagef atlas(layout.width, layout.height, channels);
    layout.classes.assign(std::size_t(layout.width) * layout.height, AtlasClass::Empty);
    for (std::size_t c = 0; c < padded.size(); ++c) {
        const PaddedChart& p = padded[c];
        const Eigen::Vector2i at = layout.offsets[c];
        for (int y = 0; y < p.height; ++y)
            for (int x = 0; x < p.width; ++x) {
                const std::size_t i = std::size_t(y) * p.width + x;
                if (p.classes[i] == AtlasClass::Empty) continue;
                atlas.pixel(at.x() + x, at.y() + y) = p.colors.pixel(x, y);
                layout.classes[std::size_t(at.y() + y) * layout.width + at.x() + x] = p.classes[i];
            }
    }
    return atlas;
}

void fill_macroblocks(AtlasLayout& layout, Imagef& atlas, BlockFill mode) {
    const int w = layout.width;
    const std::size_t cells = layout.classes.size();
    std::vector<std::uint8_t> fixed(cells, 0), unknown(cells, 0);
    for (std::size_t i = 0; i < cells; ++i) fixed[i] = layout.classes[i] != AtlasClass::Empty;
    const int bw = layout.width / 16;
    const int bh = layout.height / 16;
    for (int by = 0; by < bh; ++by)
        for (int bx = 0; bx < bw; ++bx) {
            bool touched = false;
            for (int y = by * 16; y < by * 16 + 16 && !touched; ++y)
                for (int x = bx * 16; x < bx * 16 + 16 && !touched; ++x) touched = fixed[std::size_t(y) * w + x];
            for (int y = by * 16; y < by * 16 + 16; ++y)
                for (int x = bx * 16; x < bx * 16 + 16; ++x) {
                    const std::size_t i = std::size_t(y) * w + x;
                    if (fixed[i]) continue;
                    atlas.pixel(x, y).setConstant(0.5f);
                    if (touched) {
                        layout.classes[i] = AtlasClass::Macroblock;
                        unknown[i] = 1;
                    }
                }
            if (touched && mode == BlockFill::Diffuse)
                diffuse_grid(atlas, fixed, unknown, bx * 16, by * 16, bx * 16 + 16, by * 16 + 16, 1.8f, 100, 1e-3f);
        }
}

Atlas build_atlas(const Ldi& ldi, const AtlasParams& params, BlockFill mode) {
    Atlas atlas;
    atlas.charts = generate_charts(ldi, params, &atlas.chart_of_pixel);
    atlas.padded = pad_charts(atlas.charts, ldi, params.pad, atlas.chart_of_pixel);
    std::vector<Eigen::Vector2i> sizes;
    for (const PaddedChart& p : atlas.padded) sizes.emplace_back(p.width, p.height);
    atlas.layout = pack_charts(sizes, params.max_atlas_size);
    atlas.image = render_atlas(atlas.layout, atlas.padded);
    fill_macroblocks(atlas.layout, atlas.image, mode);
    return atlas;
}

Imagef atlas_class_image(const Atlas& atlas, const std::vector<PixelClass>& pixel_classes) {
    const AtlasLayout& layout = atlas.layout;
    Imagef img(layout.width, layout.height, 3);
    auto rgb = [](float r, float g, float b) { return Eigen::Vector3f(r, g, b); };
    for (int y = 0; y < layout.height; ++y)
        for (int x = 0; x < layout.width; ++x) {
            Eigen::Vector3f c = rgb(0, 0, 0);
            switch (layout.classes[std::size_t(y) * layout.width + x]) {
                case AtlasClass::Empty: c = rgb(0.1f, 0.1f, 0.1f); break;
                case AtlasClass::Member: c = rgb(0.85f, 0.85f, 0.85f); break;
                case AtlasClass::PadCopy: c = rgb(1.0f, 0.55f, 0.55f); break;
                case AtlasClass::PadDiffuse: c = rgb(0.6f, 0.0f, 0.0f); break;
                case AtlasClass::Macroblock: c = rgb(0.1f, 0.7f, 0.1f); break;
            }
            img.pixel(x, y) = c;
        }
    if (!pixel_classes.empty()) {
        for (std::size_t ci = 0; ci < atlas.padded.size(); ++ci) {
            const PaddedChart& p = atlas.padded[ci];
            const Eigen::Vector2i at = layout.offsets[ci];
            for (int y = 0; y < p.height; ++y)
                for (int x = 0; x < p.width; ++x) {
                    const int k = p.member[std::size_t(y) * p.width + x];
                    if (k < 0) continue;
                    const PixelClass pc = pixel_classes[std::size_t(k)];
                    if (pc == PixelClass::OccludedUnknown) img.pixel(at.x() + x, at.y() + y) = rgb(0.0f, 0.1f, 0.55f);
                    if (pc == PixelClass::ForegroundNearEdge) img.pixel(at.x() + x, at.y() + y) = rgb(0.45f, 0.7f, 1.0f);
                }
        }
    }
    return img;
}

}  // namespace ldiphoto
