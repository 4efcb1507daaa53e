#include "ldiphoto/gltf.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cstring>
#include <limits>

#include "ldiphoto/error.hpp"
#include "ldiphoto/image_io.hpp"

namespace ldiphoto {

namespace {

constexpr std::uint32_t kMagic = 0x46546C67;  // "glTF"
constexpr std::uint32_t kJson = 0x4E4F534A;
constexpr std::uint32_t kBin = 0x004E4942;

template <typename T>
void append(std::vector<std::uint8_t>& out, const T& v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

void pad4(std::vector<std::uint8_t>& out, std::uint8_t fill) {
    while (out.size() % 4) out.push_back(fill);
}

std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t at) {
    if (at + 4 > b.size()) throw InputError("truncated glb");
    std::uint32_t v;
    std::memcpy(&v, b.data() + at, 4);
    return v;
}

}  // namespace

std::vector<std::uint8_t> export_glb(const TexturedMesh& mesh, const Imagef& atlas, int jpeg_quality) {
    static_assert(std::endian::native == std::endian::little, "glb writer assumes a little-endian host");
    using nlohmann::json;
    if (mesh.triangles.empty()) throw InputError("cannot export an empty mesh");
    const std::size_t nv = mesh.positions.size();
    const bool short_indices = nv < 65536;

    std::vector<std::uint8_t> bin;
    json views = json::array();
    auto view = [&](std::size_t begin, int target) {
        json v = {{"buffer", 0}, {"byteOffset", begin}, {"byteLength", bin.size() - begin}};
        if (target) v["target"] = target;
        views.push_back(v);
        pad4(bin, 0);
    };

    std::size_t begin = bin.size();
    for (const auto& t : mesh.triangles)
        for (int k : {0, 2, 1}) {
            if (short_indices) append(bin, std::uint16_t(t[k]));
            else append(bin, std::uint32_t(t[k]));
        }
    view(begin, 34963);

    begin = bin.size();
    std::array<float, 3> lo{}, hi{};
    lo.fill(std::numeric_limits<float>::infinity());
    hi.fill(-std::numeric_limits<float>::infinity());
    for (const auto& p : mesh.positions) {
        const std::array<float, 3> q{float(p.x()), float(-p.y()), float(-p.z())};
        for (int c = 0; c < 3; ++c) {
            append(bin, q[std::size_t(c)]);
            lo[std::size_t(c)] = std::min(lo[std::size_t(c)], q[std::size_t(c)]);
            hi[std::size_t(c)] = std::max(hi[std::size_t(c)], q[std::size_t(c)]);
        }
    }
    view(begin, 34962);

    begin = bin.size();
    for (const auto& t : mesh.uvs) {
        append(bin, float(t.x()));
        append(bin, float(t.y()));
    }
    view(begin, 34962);

    begin = bin.size();
    const auto jpeg = io::encode_jpeg(atlas, jpeg_quality);
    bin.insert(bin.end(), jpeg.begin(), jpeg.end());
    view(begin, 0);

    json doc;
    doc["asset"] = {{"version", "2.0"}, {"generator", "ldiphoto"}};
    doc["scene"] = 0;
    doc["scenes"] = json::array({{{"nodes", {0}}}});
    doc["nodes"] = json::array({{{"mesh", 0}}});
    doc["meshes"] = json::array({{{"primitives", json::array({{{"attributes", {{"POSITION", 1}, {"TEXCOORD_0", 2}}},
                                                                {"indices", 0},
                                                                {"material", 0},
                                                                {"mode", 4}}})}}});
    doc["materials"] = json::array({{{"pbrMetallicRoughness",
                                      {{"baseColorTexture", {{"index", 0}}}, {"metallicFactor", 0.0}, {"roughnessFactor", 1.0}}},
                                     {"extensions", {{"KHR_materials_unlit", json::object()}}}}});
    doc["extensionsUsed"] = {"KHR_materials_unlit"};
    doc["samplers"] = json::array({{{"magFilter", 9729}, {"minFilter", 9729}, {"wrapS", 33071}, {"wrapT", 33071}}});
    doc["textures"] = json::array({{{"sampler", 0}, {"source", 0}}});
    doc["images"] = json::array({{{"bufferView", 3}, {"mimeType", "image/jpeg"}}});
    doc["bufferViews"] = views;
    doc["accessors"] = json::array({
        {{"bufferView", 0}, {"componentType", short_indices ? 5123 : 5125}, {"count", 3 * mesh.triangles.size()}, {"type", "SCALAR"}},
        {{"bufferView", 1}, {"componentType", 5126}, {"count", nv}, {"type", "VEC3"}, {"min", lo}, {"max", hi}},
        {{"bufferView", 2}, {"componentType", 5126}, {"count", nv}, {"type", "VEC2"}},
    });
    doc["buffers"] = json::array({{{"byteLength", bin.size()}}});

    std::string text = doc.dump();
    while (text.size() % 4) text.push_back(' ');

    std::vector<std::uint8_t> out;
    const std::uint32_t total = std::uint32_t(12 + 8 + text.size() + 8 + bin.size());
    append(out, kMagic);
    append(out, std::uint32_t(2));
    append(out, total);
    append(out, std::uint32_t(text.size()));
    append(out, kJson);
    out.insert(out.end(), text.begin(), text.end());
    append(out, std::uint32_t(bin.size()));
    append(out, kBin);
    out.insert(out.end(), bin.begin(), bin.end());
    return out;
}

GlbChunks parse_glb(const std::vector<std::uint8_t>& bytes) {
    if (read_u32(bytes, 0) != kMagic || read_u32(bytes, 4) != 2) throw InputError("not a glTF 2.0 binary");
    if (read_u32(bytes, 8) != bytes.size()) throw InputError("glb length field does not match the data");
    GlbChunks chunks;
    std::size_t at = 12;
    while (at < bytes.size()) {
        const std::uint32_t len = read_u32(bytes, at), type = read_u32(bytes, at + 4);
        if (at + 8 + len > bytes.size()) throw InputError("glb chunk runs past the end");
        const auto* p = bytes.data() + at + 8;
        if (type == kJson) chunks.json.assign(reinterpret_cast<const char*>(p), len);
        else if (type == kBin) chunks.bin.assign(p, p + len);
        at += 8 + len;
    }
    if (chunks.json.empty()) throw InputError("glb has no JSON chunk");
    return chunks;
}

}  // namespace ldiphoto
