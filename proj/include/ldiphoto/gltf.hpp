#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldiphoto/image.hpp"
#include "ldiphoto/mesher.hpp"

namespace ldiphoto {

/// Binary glTF 2.0: one unlit textured triangle primitive, JPEG texture embedded in the single
/// buffer. Camera-frame positions are stored as (x, -y, -z) with reversed winding so the photo
/// faces a viewer looking down -z. Indices are 16-bit when the vertex count allows it.
std::vector<std::uint8_t> export_glb(const TexturedMesh& mesh, const Imagef& atlas, int jpeg_quality = 90);

struct GlbChunks {
    std::string json;
    std::vector<std::uint8_t> bin;
};

/// Splits a glb into its JSON and BIN chunks; throws InputError on a malformed container.
GlbChunks parse_glb(const std::vector<std::uint8_t>& bytes);

}  // namespace ldiphoto
