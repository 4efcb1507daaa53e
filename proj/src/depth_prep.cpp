#include "ldiphoto/depth_prep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "ldiphoto/parallel.hpp"

namespace ldiphoto {

void FilterParams::check() const {
    if (kernel_size < 1 || kernel_size % 2 == 0) throw InputError("kernel size must be odd");
    if (!(sigma_disparity > 0.0f)) throw InputError("sigma_disparity must be positive");
    if (!(tau_disp > 0.0f && tau_disp < 1.0f)) throw InputError("tau_disp must lie in (0, 1)");
    if (min_component < 1) throw InputError("min_component must be at least 1");
}

std::size_t weighted_median_index(std::span<const WeightedSample> samples) {
    const std::size_t n = samples.size();
    std::array<std::size_t, 64> small_order;
    std::vector<std::size_t> big_order;
    std::size_t* order = small_order.data();
    if (n > small_order.size()) {
        big_order.resize(n);
        order = big_order.data();
    }
    std::iota(order, order + n, std::size_t{0});
    std::stable_sort(order, order + n, [&](std::size_t a, std::size_t b) { return samples[a].value < samples[b].value; });

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += samples[i].weight;
    if (total <= 0.0) return order[(n - 1) / 2];

    double before = 0.0;
    double best = std::numeric_limits<double>::infinity();
    std::size_t pick = order[0];
    for (std::size_t i = 0; i < n; ++i) {
        const double w = samples[order[i]].weight;
        if (w > 0.0) {
            const double after = total - before - w;
            const double gap = std::abs(before - after);
            if (gap < best) {
                best = gap;
                pick = order[i];
            }
        }
        before += w;
    }
    return pick;
}

std::vector<std::uint8_t> near_edge_mask(const DisparityImage& disp, float tau) {
    const int w = disp.width();
    const int h = disp.height();
    std::vector<std::uint8_t> mask(std::size_t(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float d = disp(x, y);
            const bool edge = (x > 0 && std::abs(disp(x - 1, y) - d) > tau) ||
                              (x + 1 < w && std::abs(disp(x + 1, y) - d) > tau) ||
                              (y > 0 && std::abs(disp(x, y - 1) - d) > tau) ||
                              (y + 1 < h && std::abs(disp(x, y + 1) - d) > tau);
            mask[std::size_t(y) * w + x] = edge ? 1 : 0;
        }
    return mask;
}

DisparityImage weighted_median_filter(const DisparityImage& disp, const FilterParams& params) {
    params.check();
    const int w = disp.width();
    const int h = disp.height();
    const int r = params.kernel_size / 2;
    const auto edge = near_edge_mask(disp, params.tau_disp);
    const double inv_two_sigma2 = 1.0 / (2.0 * double(params.sigma_disparity) * params.sigma_disparity);
    DisparityImage::Array out(h, w);

    parallel_for(0, h, [&](long yl) {
        const int y = int(yl);
        std::vector<WeightedSample> window;
        window.reserve(std::size_t(params.kernel_size) * params.kernel_size);
        for (int x = 0; x < w; ++x) {
            const float center = disp(x, y);
            window.clear();
            for (int wy = std::max(0, y - r); wy <= std::min(h - 1, y + r); ++wy)
                for (int wx = std::max(0, x - r); wx <= std::min(w - 1, x + r); ++wx) {
                    const float v = disp(wx, wy);
                    const double diff = double(v) - center;
                    const double weight = edge[std::size_t(wy) * w + wx] ? 0.0 : std::exp(-diff * diff * inv_two_sigma2);
                    window.push_back({v, weight});
                }
            out(y, x) = window[weighted_median_index(window)].value;
        }
    });
    return DisparityImage(std::move(out));
}

std::vector<int> label_components(const DisparityImage& disp, float tau, int* count) {
    const int w = disp.width();
    const int h = disp.height();
    std::vector<int> labels(std::size_t(w) * h, -1);
    std::vector<int> stack;
    int next = 0;
    for (int start = 0; start < w * h; ++start) {
        if (labels[std::size_t(start)] >= 0) continue;
        labels[std::size_t(start)] = next;
        stack.push_back(start);
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            const int px = p % w;
            const int py = p / w;
            const float d = disp(px, py);
            const int nbr[4][2] = {{px - 1, py}, {px + 1, py}, {px, py - 1}, {px, py + 1}};
            for (const auto& q : nbr) {
                if (!disp.contains(q[0], q[1])) continue;
                const int qi = q[1] * w + q[0];
                if (labels[std::size_t(qi)] < 0 && std::abs(disp(q[0], q[1]) - d) <= tau) {
                    labels[std::size_t(qi)] = next;
                    stack.push_back(qi);
                }
            }
        }
        ++next;
    }
    if (count) *count = next;
    return labels;
}

namespace {

struct Contact {
    int pixel;      // neighbor pixel outside the component
    bool nearer;    // neighbor has larger disparity
    bool in_large;  // neighbor belongs to a component of acceptable size
};

struct Component {
    std::vector<int> pixels;
};

// Decides the absorbing side and returns the contact pixels on it, in scanline order.
std::vector<int> absorbing_contacts(const std::vector<Contact>& contacts) {
    const bool any_large = std::any_of(contacts.begin(), contacts.end(), [](const Contact& c) { return c.in_large; });
    int nearer = 0, farther = 0;
    for (const Contact& c : contacts) {
        if (any_large && !c.in_large) continue;
        (c.nearer ? nearer : farther) += 1;
    }
    const bool take_nearer = nearer > farther;
    std::vector<int> side;
    for (const Contact& c : contacts) {
        if (any_large && !c.in_large) continue;
        if (c.nearer == take_nearer) side.push_back(c.pixel);
    }
    std::sort(side.begin(), side.end());
    side.erase(std::unique(side.begin(), side.end()), side.end());
    return side;
}

std::vector<Contact> collect_contacts(const DisparityImage& disp, const std::vector<int>& labels,
                                      const std::vector<int>& sizes, int label, const std::vector<int>& pixels,
                                      int min_size) {
    const int w = disp.width();
    std::vector<Contact> contacts;
    for (int p : pixels) {
        const int px = p % w;
        const int py = p / w;
        const int nbr[4][2] = {{px - 1, py}, {px + 1, py}, {px, py - 1}, {px, py + 1}};
        for (const auto& q : nbr) {
            if (!disp.contains(q[0], q[1])) continue;
            const int qi = q[1] * w + q[0];
            const int ql = labels[std::size_t(qi)];
            if (ql == label) continue;
            contacts.push_back({qi, disp(q[0], q[1]) > disp(px, py), sizes[std::size_t(ql)] >= min_size});
        }
    }
    return contacts;
}

}  // namespace

DisparityImage merge_small_components(const DisparityImage& disp, const FilterParams& params) {
    params.check();
    const int w = disp.width();
    DisparityImage current = disp;

    auto gather = [&](const DisparityImage& img, std::vector<int>& labels, std::vector<int>& sizes,
                      std::vector<std::vector<int>>& members) {
        int count = 0;
        labels = label_components(img, params.tau_disp, &count);
        sizes.assign(std::size_t(count), 0);
        members.assign(std::size_t(count), {});
        for (std::size_t i = 0; i < labels.size(); ++i) {
            ++sizes[std::size_t(labels[i])];
            members[std::size_t(labels[i])].push_back(int(i));
        }
    };

    std::vector<int> labels, sizes;
    std::vector<std::vector<int>> members;

    // Simultaneous passes: every small component copies the nearest pixel of its absorbing side.
    constexpr int kPasses = 8;
    for (int pass = 0; pass < kPasses; ++pass) {
        gather(current, labels, sizes, members);
        DisparityImage::Array next = current.values();
        bool changed = false;
        for (std::size_t c = 0; c < sizes.size(); ++c) {
            if (sizes[c] >= params.min_component) continue;
            const auto contacts = collect_contacts(current, labels, sizes, int(c), members[c], params.min_component);
            const auto side = absorbing_contacts(contacts);
            if (side.empty()) continue;
            for (int p : members[c]) {
                const int px = p % w;
                const int py = p / w;
                long best = std::numeric_limits<long>::max();
                int pick = side.front();
                for (int q : side) {
                    const long ddx = q % w - px;
                    const long ddy = q / w - py;
                    const long dist = ddx * ddx + ddy * ddy;
                    if (dist < best) {
                        best = dist;
                        pick = q;
                    }
                }
                next(py, px) = current(pick % w, pick / w);
            }
            changed = true;
        }
        if (!changed) return current;
        current = DisparityImage(std::move(next));
    }

    // Remaining stragglers (oscillating clusters): absorb one component at a time wholesale.
    for (;;) {
        gather(current, labels, sizes, members);
        int smallest = -1;
        for (std::size_t c = 0; c < sizes.size(); ++c)
            if (sizes[c] < params.min_component && (smallest < 0 || sizes[c] < sizes[std::size_t(smallest)]))
                smallest = int(c);
        if (smallest < 0) break;
        const auto contacts =
            collect_contacts(current, labels, sizes, smallest, members[std::size_t(smallest)], params.min_component);
        const auto side = absorbing_contacts(contacts);
        if (side.empty()) break;  // the whole image is one small component
        DisparityImage::Array next = current.values();
        const float v = current(side.front() % w, side.front() / w);
        for (int p : members[std::size_t(smallest)]) next(p / w, p % w) = v;
        current = DisparityImage(std::move(next));
    }
    return current;
}

}  // namespace ldiphoto
