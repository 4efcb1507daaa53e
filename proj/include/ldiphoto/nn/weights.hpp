#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace ldiphoto::nn {

struct WeightArray {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;  // row-major
};

/// Named float arrays. File layout, all little-endian:
///   "LDIW", u32 count, then per entry: u32 name length, name bytes, u32 ndim, ndim x u32 dims,
///   prod(dims) x f32.
class WeightStore {
public:
    static WeightStore load(const std::filesystem::path& path);
    static WeightStore parse(const std::vector<std::uint8_t>& bytes);
    std::vector<std::uint8_t> serialize() const;
    void save(const std::filesystem::path& path) const;

    void set(const std::string& name, std::vector<std::uint32_t> dims, std::vector<float> data);
    bool contains(const std::string& name) const { return arrays_.count(name) != 0; }
    /// Throws InputError when missing or shaped differently.
    const WeightArray& get(const std::string& name, const std::vector<std::uint32_t>& dims) const;
    const std::map<std::string, WeightArray>& arrays() const { return arrays_; }

private:
    std::map<std::string, WeightArray> arrays_;
};

}  // namespace ldiphoto::nn
