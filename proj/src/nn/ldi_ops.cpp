#include "ldiphoto/nn/ldi_ops.hpp"

#include <deque>

#include "ldiphoto/parallel.hpp"

namespace ldiphoto::nn {

std::shared_ptr<const LdiGraph> LdiGraph::from(const Ldi& ldi) {
    auto g = std::make_shared<LdiGraph>();
    g->width = ldi.width();
    g->height = ldi.height();
    g->index = ldi.index();
    return g;
}

LdiTensor::LdiTensor(GraphPtr g, Eigen::MatrixXf v) : graph(std::move(g)), values(std::move(v)) {
    if (values.cols() != graph->size()) throw InputError("tensor width does not match its graph");
}

KernelSpec::KernelSpec(int k_, int stride_, int in, int out)
    : k(k_), stride(stride_), in_channels(in), out_channels(out), weights(Weights::Zero(out, in * k_ * k_)),
      bias(Eigen::VectorXf::Zero(out)) {}

void KernelSpec::check() const {
    if (k != 1 && k != 3 && k != 5 && k != 7) throw InputError("kernel size must be 1, 3, 5 or 7");
    if (stride != 1 && stride != 2) throw InputError("stride must be 1 or 2");
    if (weights.rows() != out_channels || weights.cols() != in_channels * k * k || bias.size() != out_channels)
        throw InputError("kernel arrays do not match the declared shape");
}

std::vector<int> gather_kernel(const LdiGraph& graph, int center, int k, std::vector<int>* visit_order) {
    static constexpr Dir kOrder[4] = {Dir::Up, Dir::Down, Dir::Left, Dir::Right};
    const int r = k / 2;
    std::vector<int> slots(std::size_t(k) * k, -1);
    struct Item {
        int pixel, ox, oy;
    };
    std::deque<Item> queue;
    slots[std::size_t(r * k + r)] = center;
    queue.push_back({center, 0, 0});
    if (visit_order) visit_order->assign(1, r * k + r);
    while (!queue.empty()) {
        const Item it = queue.front();
        queue.pop_front();
        for (Dir d : kOrder) {
            const int n = graph.neighbor(it.pixel, d);
            if (n < 0) continue;
            const int ox = it.ox + dx(d);
            const int oy = it.oy + dy(d);
            if (std::abs(ox) > r || std::abs(oy) > r) continue;
            const int slot = (oy + r) * k + ox + r;
            if (slots[std::size_t(slot)] >= 0) continue;
            slots[std::size_t(slot)] = n;
            if (visit_order) visit_order->push_back(slot);
            queue.push_back({n, ox, oy});
        }
    }
    return slots;
}

ScaleMap ldi_downscale(const GraphPtr& fine) {
    ScaleMap map;
    map.fine = fine;
    const LdiGraph& f = *fine;
    std::vector<int> coarse_of(std::size_t(f.size()), -1);
    for (int k = 0; k < f.size(); ++k) {
        if (f.index(0, k) % 2 == 0 && f.index(1, k) % 2 == 0) {
            coarse_of[std::size_t(k)] = int(map.retained.size());
            map.retained.push_back(k);
        }
    }
    auto coarse = std::make_shared<LdiGraph>();
    coarse->width = (f.width + 1) / 2;
    coarse->height = (f.height + 1) / 2;
    const int kc = int(map.retained.size());
    coarse->index.setConstant(6, kc, kNoNeighbor);
    for (int c = 0; c < kc; ++c) {
        const int p = map.retained[std::size_t(c)];
        coarse->index(0, c) = f.index(0, p) / 2;
        coarse->index(1, c) = f.index(1, p) / 2;
        // Straight two-step paths are the only ones that reach another retained pixel.
        for (Dir d : {Dir::Right, Dir::Down}) {
            const int a = f.neighbor(p, d);
            const int b = a < 0 ? -1 : f.neighbor(a, d);
            if (b < 0 || coarse_of[std::size_t(b)] < 0) continue;
            const int cb = coarse_of[std::size_t(b)];
            coarse->index(2 + int(d), c) = cb;
            coarse->index(2 + int(opposite(d)), cb) = c;
        }
    }

    // Group membership: walk toward the 2x2 anchor, preferring up, down, left, right.
    map.assignment.assign(std::size_t(f.size()), -1);
    for (int k = 0; k < f.size(); ++k) {
        if (coarse_of[std::size_t(k)] >= 0) {
            map.assignment[std::size_t(k)] = coarse_of[std::size_t(k)];
            continue;
        }
        const bool odd_x = f.index(0, k) % 2 != 0;
        const bool odd_y = f.index(1, k) % 2 != 0;
        int target = -1;
        if (odd_x && odd_y) {
            for (auto [d1, d2] : {std::pair{Dir::Up, Dir::Left}, std::pair{Dir::Left, Dir::Up}}) {
                const int a = f.neighbor(k, d1);
                const int b = a < 0 ? -1 : f.neighbor(a, d2);
                if (b >= 0 && coarse_of[std::size_t(b)] >= 0) {
                    target = b;
                    break;
                }
            }
        } else {
            const int a = f.neighbor(k, odd_y ? Dir::Up : Dir::Left);
            if (a >= 0 && coarse_of[std::size_t(a)] >= 0) target = a;
        }
        if (target >= 0) map.assignment[std::size_t(k)] = coarse_of[std::size_t(target)];
    }
    map.coarse = std::move(coarse);
    return map;
}

ConvResult ldi_partial_conv(const LdiTensor& x, const LdiTensor& mask, const KernelSpec& spec, const ScaleMap* map) {
    spec.check();
    if (x.channels() != spec.in_channels) throw InputError("partial conv: input channel count does not match kernel");
    if (mask.channels() != 1 || mask.graph != x.graph) throw InputError("partial conv: mask must be 1 channel on the same graph");
    if (spec.stride == 2 && (!map || map->fine != x.graph)) throw InputError("stride 2 requires the scale map of the input");

    const LdiGraph& g = *x.graph;
    const GraphPtr out_graph = spec.stride == 2 ? map->coarse : x.graph;
    const int out_count = out_graph->size();
    ConvResult out{LdiTensor(out_graph, spec.out_channels), LdiTensor(out_graph, 1)};
    const int kk = spec.k * spec.k;
    const double full = double(kk);
    const Eigen::MatrixXd weights = spec.weights.cast<double>();
    const Eigen::VectorXd bias = spec.bias.cast<double>();

    parallel_for(0, out_count, [&](long ol) {
        const int o = int(ol);
        const int center = spec.stride == 2 ? map->retained[std::size_t(o)] : o;
        const auto slots = gather_kernel(g, center, spec.k);
        Eigen::VectorXd col = Eigen::VectorXd::Zero(spec.in_channels * kk);
        double msum = 0.0;
        for (int s = 0; s < kk; ++s) {
            const int p = slots[std::size_t(s)];
            if (p < 0) continue;
            const float m = mask.values(0, p);
            msum += m;
            if (m == 0.0f) continue;
            for (int i = 0; i < spec.in_channels; ++i) col(i * kk + s) = double(x.values(i, p)) * m;
        }
        if (msum > 0.0) {
            out.values.values.col(o) = ((weights * col) * (full / msum) + bias).cast<float>();
            out.mask.values(0, o) = 1.0f;
        }
    });
    return out;
}

LdiTensor ldi_subsample(const LdiTensor& fine, const ScaleMap& map) {
    LdiTensor out(map.coarse, fine.channels());
    for (std::size_t c = 0; c < map.retained.size(); ++c) out.values.col(Eigen::Index(c)) = fine.values.col(map.retained[c]);
    return out;
}

LdiTensor ldi_upscale(const LdiTensor& coarse, const ScaleMap& map, std::vector<std::uint8_t>* mapped) {
    if (coarse.graph != map.coarse) throw InputError("upscale: tensor is not on the map's coarse graph");
    LdiTensor out(map.fine, coarse.channels());
    if (mapped) mapped->assign(map.assignment.size(), 0);
    for (std::size_t k = 0; k < map.assignment.size(); ++k) {
        const int c = map.assignment[k];
        if (c < 0) continue;
        out.values.col(Eigen::Index(k)) = coarse.values.col(c);
        if (mapped) (*mapped)[k] = 1;
    }
    return out;
}

}  // namespace ldiphoto::nn
