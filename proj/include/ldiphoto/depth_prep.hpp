#pragma once

#include <span>
#include <vector>

#include "ldiphoto/image.hpp"

namespace ldiphoto {

struct FilterParams {
    int kernel_size = 5;
    float sigma_disparity = 0.2f;
    float tau_disp = 0.05f;
    int min_component = 20;

    /// Throws InputError when a field is out of range.
    void check() const;
};

/// One sample of a median window.
struct WeightedSample {
    float value;
    double weight;
};

/// Index of the sample whose preceding and following weight sums are closest to equal,
/// after a stable sort by value. Samples with zero weight are not selectable unless every
/// weight is zero, in which case the plain (lower) median is returned.
std::size_t weighted_median_index(std::span<const WeightedSample> samples);

/// Pixels with a 4-neighbor more than tau_disp away.
std::vector<std::uint8_t> near_edge_mask(const DisparityImage& disp, float tau_disp);

/// Edge-sharpening weighted median: window samples are Gaussian-weighted by their disparity
/// difference to the center; near-edge samples get zero weight. Windows are clipped at borders.
DisparityImage weighted_median_filter(const DisparityImage& disp, const FilterParams& params);

/// 4-connected labeling with adjacency |d(p) - d(q)| <= tau. Labels are dense, in scanline order of first pixel.
std::vector<int> label_components(const DisparityImage& disp, float tau, int* count = nullptr);

/// Absorbs every component smaller than params.min_component into whichever side
/// (nearer or farther neighbors) shares more boundary edges with it.
DisparityImage merge_small_components(const DisparityImage& disp, const FilterParams& params);

}  // namespace ldiphoto
