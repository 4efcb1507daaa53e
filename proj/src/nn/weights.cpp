#include "ldiphoto/nn/weights.hpp"

#include <bit>
#include <cstring>
#include <numeric>

#include "ldiphoto/error.hpp"
#include "ldiphoto/image_io.hpp"

namespace ldiphoto::nn {

namespace {

static_assert(std::endian::native == std::endian::little, "weight files are read in native little-endian order");

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}
    void take(void* dst, std::size_t n) {
        if (pos_ + n > bytes_.size()) throw InputError("weight file truncated");
        std::memcpy(dst, bytes_.data() + pos_, n);
        pos_ += n;
    }
    std::uint32_t u32() {
        std::uint32_t v;
        take(&v, 4);
        return v;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

void put(std::vector<std::uint8_t>& out, const void* src, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(src);
    out.insert(out.end(), p, p + n);
}

std::size_t element_count(const std::vector<std::uint32_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           [](std::size_t a, std::uint32_t b) { return a * b; });
}

std::string shape(const std::vector<std::uint32_t>& dims) {
    std::string s = "[";
    for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
    return s + "]";
}

}  // namespace

WeightStore WeightStore::parse(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    char magic[4];
    r.take(magic, 4);
    if (std::memcmp(magic, "LDIW", 4) != 0) throw InputError("not a weight file (bad magic)");
    WeightStore store;
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name(r.u32(), '\0');
        r.take(name.data(), name.size());
        std::vector<std::uint32_t> dims(r.u32());
        for (auto& d : dims) d = r.u32();
        std::vector<float> data(element_count(dims));
        r.take(data.data(), data.size() * sizeof(float));
        store.set(name, std::move(dims), std::move(data));
    }
    if (!r.done()) throw InputError("trailing bytes after weight entries");
    return store;
}

WeightStore WeightStore::load(const std::filesystem::path& path) { return parse(io::read_file(path)); }

std::vector<std::uint8_t> WeightStore::serialize() const {
    std::vector<std::uint8_t> out;
    put(out, "LDIW", 4);
    const std::uint32_t count = std::uint32_t(arrays_.size());
    put(out, &count, 4);
    for (const auto& [name, a] : arrays_) {
        const std::uint32_t len = std::uint32_t(name.size());
        put(out, &len, 4);
        put(out, name.data(), name.size());
        const std::uint32_t ndim = std::uint32_t(a.dims.size());
        put(out, &ndim, 4);
        put(out, a.dims.data(), a.dims.size() * 4);
        put(out, a.data.data(), a.data.size() * sizeof(float));
    }
    return out;
}

void WeightStore::save(const std::filesystem::path& path) const { io::write_file(path, serialize()); }

void WeightStore::set(const std::string& name, std::vector<std::uint32_t> dims, std::vector<float> data) {
    if (element_count(dims) != data.size()) throw InputError("weight '" + name + "' has data of the wrong length");
    arrays_[name] = {std::move(dims), std::move(data)};
}

const WeightArray& WeightStore::get(const std::string& name, const std::vector<std::uint32_t>& dims) const {
    auto it = arrays_.find(name);
    if (it == arrays_.end()) throw InputError("missing weight '" + name + "'");
    if (it->second.dims != dims)
        throw InputError("weight '" + name + "' has shape " + shape(it->second.dims) + ", expected " + shape(dims));
    return it->second;
}

}  // namespace ldiphoto::nn
