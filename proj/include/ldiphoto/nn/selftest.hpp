#pragma once

#include <cstdint>
#include <string>

namespace ldiphoto::nn {

struct SelftestResult {
    int cases = 0;
    double conv_error = 0;      // max abs difference, values and masks
    double downscale_error = 0;
    double upscale_error = 0;
    double network_error = 0;
    bool passed = false;        // operators within 1e-5, networks within 1e-4
    std::string summary() const;
};

/// Random single-layer, fully connected LDIs (8..64 px per side, 1..8 channels, k in {3, 5, 7},
/// stride 1 or 2) run through the LDI operators and the plain 2D reference.
SelftestResult equivalence_selftest(int cases = 100, std::uint32_t seed = 1);

}  // namespace ldiphoto::nn
