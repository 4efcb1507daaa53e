#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ldiphoto/image.hpp"

namespace ldiphoto::io {

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Decodes PNG or JPEG (detected from the file signature) into a 3-channel image in [0, 1].
Imagef read_color(const std::filesystem::path& path);

/// Reads a 16-bit grayscale PNG (value / 65535), an 8-bit grayscale PNG (value / 255),
/// or a PFM normalized by its maximum.
DisparityImage read_disparity(const std::filesystem::path& path);

/// Writes an 8-bit PNG with 1 or 3 channels; values are clamped to [0, 1].
void write_png(const std::filesystem::path& path, const Imagef& image);
Bytes encode_png(const Imagef& image);

/// Writes a 16-bit grayscale PNG (d * 65535).
void write_disparity_png(const std::filesystem::path& path, const DisparityImage& disp);

Imagef decode_png(std::span<const std::uint8_t> bytes, bool* sixteen_bit = nullptr);

/// Baseline JPEG, 4:2:0 chroma subsampling.
Bytes encode_jpeg(const Imagef& image, int quality);
Imagef decode_jpeg(std::span<const std::uint8_t> bytes);

Imagef read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const Imagef& image);

}  // namespace ldiphoto::io
