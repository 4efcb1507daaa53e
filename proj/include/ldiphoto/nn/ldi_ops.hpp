#pragma once

#include <Eigen/Core>

#include <memory>
#include <vector>

#include "ldiphoto/ldi.hpp"

namespace ldiphoto::nn {

/// Connectivity of one scale level: positions and links only, no values.
struct LdiGraph {
    int width = 0;
    int height = 0;
    IndexTable index;

    int size() const { return int(index.cols()); }
    std::int32_t neighbor(int k, Dir d) const { return index(2 + int(d), k); }

    static std::shared_ptr<const LdiGraph> from(const Ldi& ldi);
};

using GraphPtr = std::shared_ptr<const LdiGraph>;

/// C x K values on a shared graph.
struct LdiTensor {
    GraphPtr graph;
    Eigen::MatrixXf values;

    LdiTensor() = default;
    LdiTensor(GraphPtr g, int channels) : graph(std::move(g)), values(Eigen::MatrixXf::Zero(channels, graph->size())) {}
    LdiTensor(GraphPtr g, Eigen::MatrixXf v);

    int channels() const { return int(values.rows()); }
    int size() const { return int(values.cols()); }
};

/// Convolution weights laid out [out][in][ky][kx], row-major.
struct KernelSpec {
    using Weights = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    int k = 3;
    int stride = 1;
    int in_channels = 0;
    int out_channels = 0;
    Weights weights;  // out x (in * k * k)
    Eigen::VectorXf bias;

    KernelSpec() = default;
    KernelSpec(int k, int stride, int in_channels, int out_channels);

    float& w(int o, int i, int ky, int kx) { return weights(o, (i * k + ky) * k + kx); }
    float w(int o, int i, int ky, int kx) const { return weights(o, (i * k + ky) * k + kx); }

    /// Throws InputError on an even or unsupported size or inconsistent arrays.
    void check() const;
};

/// Kernel slots in row-major order (slot (dx + r, dy + r) at index (dy + r) * k + dx + r), -1 for empty.
/// Filled breadth-first over connections in up, down, left, right order; each slot is taken by the
/// first pixel that reaches it and is never revisited.
std::vector<int> gather_kernel(const LdiGraph& graph, int center, int k, std::vector<int>* visit_order = nullptr);

/// Fine -> coarse structure for one downscale step.
struct ScaleMap {
    GraphPtr fine;
    GraphPtr coarse;
    std::vector<int> retained;    // coarse id -> fine id
    std::vector<int> assignment;  // fine id -> coarse id, -1 when unreachable
};

/// Keeps pixels with even x and y (all layers), halves their coordinates and connects two
/// retained pixels when a two-step fine path joins them.
ScaleMap ldi_downscale(const GraphPtr& fine);

/// Partial convolution: y = W (x * m) k^2 / sum(m) + b where sum(m) > 0, else 0; mask' = [sum(m) > 0].
/// Stride 2 evaluates the fine gather at the retained pixels of `map` (required then).
struct ConvResult {
    LdiTensor values;
    LdiTensor mask;
};
ConvResult ldi_partial_conv(const LdiTensor& x, const LdiTensor& mask, const KernelSpec& spec,
                            const ScaleMap* map = nullptr);

/// Retained-pixel subsampling of values (no filtering).
LdiTensor ldi_subsample(const LdiTensor& fine, const ScaleMap& map);

/// Nearest upscale: every fine pixel takes its assigned coarse value. Unassigned pixels get 0
/// and are reported through `mapped` (1 = assigned).
LdiTensor ldi_upscale(const LdiTensor& coarse, const ScaleMap& map, std::vector<std::uint8_t>* mapped = nullptr);

}  // namespace ldiphoto::nn
