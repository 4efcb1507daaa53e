#include "ldiphoto/image_io.hpp"

#include <png.h>
// jpeglib.h needs size_t and FILE declared first.
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace ldiphoto::io {

namespace {

std::uint8_t to_byte(float v) {
    return std::uint8_t(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

bool is_png(std::span<const std::uint8_t> b) {
    return b.size() >= 8 && png_sig_cmp(b.data(), 0, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> b) {
    return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

bool is_pfm(std::span<const std::uint8_t> b) {
    return b.size() >= 2 && b[0] == 'P' && (b[1] == 'f' || b[1] == 'F');
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

Imagef parse_pfm(std::span<const std::uint8_t> bytes) {
    std::string text(bytes.begin(), bytes.begin() + std::min<std::size_t>(bytes.size(), 256));
    std::istringstream header(text);
    std::string magic;
    int width = 0, height = 0;
    double scale = 0;
    header >> magic >> width >> height >> scale;
    if (!header || (magic != "Pf" && magic != "PF") || width <= 0 || height <= 0) {
        throw InputError("malformed PFM header");
    }
    const int channels = magic == "PF" ? 3 : 1;
    // Header ends after a single whitespace character following the scale.
    std::size_t offset = std::size_t(header.tellg()) + 1;
    const std::size_t need = std::size_t(width) * height * channels * sizeof(float);
    if (bytes.size() < offset + need) throw InputError("truncated PFM data");
    const bool little = scale < 0;
    Imagef img(width, height, channels);
    for (int row = 0; row < height; ++row) {
        const int y = height - 1 - row;  // PFM rows are stored bottom-up
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < channels; ++c) {
                std::uint8_t raw[4];
                std::memcpy(raw, bytes.data() + offset, 4);
                offset += 4;
                if (!little) std::reverse(raw, raw + 4);
                float v;
                std::memcpy(&v, raw, 4);
                img(x, y, c) = v;
            }
        }
    }
    return img;
}

}  // namespace

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

namespace {

struct PngReadSource {
    std::span<const std::uint8_t> bytes;
    std::size_t offset = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t count) {
    auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
    if (src->offset + count > src->bytes.size()) png_error(png, "read past end of PNG data");
    std::memcpy(out, src->bytes.data() + src->offset, count);
    src->offset += count;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t count) {
    auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + count);
}

void png_flush_noop(png_structp) {}

[[noreturn]] void png_throw(png_structp, png_const_charp msg) { throw InputError(std::string("PNG: ") + msg); }

void png_warn(png_structp, png_const_charp) {}

/// Low-level writer; bit_depth 8 or 16, rows of big-endian samples.
Bytes write_png_rows(int width, int height, int channels, int bit_depth, const std::vector<png_byte>& buf) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw, png_warn);
    png_infop info = png_create_info_struct(png);
    Bytes out;
    try {
        png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
        png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), bit_depth,
                     channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        const std::size_t stride = std::size_t(width) * channels * (bit_depth / 8);
        for (int y = 0; y < height; ++y) png_write_row(png, buf.data() + stride * y);
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
    return out;
}

}  // namespace

Imagef decode_png(std::span<const std::uint8_t> bytes, bool* sixteen_bit) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_throw, png_warn);
    png_infop info = png_create_info_struct(png);
    PngReadSource src{bytes};
    Imagef img;
    try {
        png_set_read_fn(png, &src, png_read_from_span);
        png_read_info(png, info);
        const int color_type = png_get_color_type(png, info);
        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        png_read_update_info(png, info);
        const int width = int(png_get_image_width(png, info));
        const int height = int(png_get_image_height(png, info));
        const int depth = png_get_bit_depth(png, info);
        const int channels = png_get_channels(png, info);
        if (sixteen_bit) *sixteen_bit = depth == 16;
        std::vector<png_byte> row(png_get_rowbytes(png, info));
        img = Imagef(width, height, channels);
        for (int y = 0; y < height; ++y) {
            png_read_row(png, row.data(), nullptr);
            for (int x = 0; x < width; ++x)
                for (int c = 0; c < channels; ++c) {
                    const std::size_t i = std::size_t(x) * channels + c;
                    img(x, y, c) = depth == 16 ? float((row[2 * i] << 8) | row[2 * i + 1]) / 65535.0f
                                               : row[i] / 255.0f;
                }
        }
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

Bytes encode_png(const Imagef& img) {
    if (img.channels() != 1 && img.channels() != 3) throw InputError("PNG output needs 1 or 3 channels");
    std::vector<png_byte> buf(std::size_t(img.pixel_count()) * img.channels());
    for (Eigen::Index i = 0; i < img.pixel_count(); ++i)
        for (int c = 0; c < img.channels(); ++c) buf[std::size_t(i) * img.channels() + c] = to_byte(img.data()(c, i));
    return write_png_rows(img.width(), img.height(), img.channels(), 8, buf);
}

void write_png(const std::filesystem::path& path, const Imagef& image) {
    write_file(path, encode_png(image));
}

void write_disparity_png(const std::filesystem::path& path, const DisparityImage& disp) {
    std::vector<png_byte> buf(std::size_t(disp.width()) * disp.height() * 2);
    for (int y = 0; y < disp.height(); ++y)
        for (int x = 0; x < disp.width(); ++x) {
            const auto v = unsigned(std::lround(disp(x, y) * 65535.0f));
            const std::size_t i = (std::size_t(y) * disp.width() + x) * 2;
            buf[i] = png_byte(v >> 8);
            buf[i + 1] = png_byte(v & 0xFF);
        }
    write_file(path, write_png_rows(disp.width(), disp.height(), 1, 16, buf));
}

Bytes encode_jpeg(const Imagef& img, int quality) {
    if (img.channels() != 3) throw InputError("JPEG output needs 3 channels");
    jpeg_compress_struct cinfo;
    JpegErrorManager err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    unsigned char* mem = nullptr;
    unsigned long mem_size = 0;
    if (setjmp(err.jump)) {
        jpeg_destroy_compress(&cinfo);
        std::free(mem);
        throw InputError(std::string("JPEG encode failed: ") + err.message);
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &mem, &mem_size);
    cinfo.image_width = JDIMENSION(img.width());
    cinfo.image_height = JDIMENSION(img.height());
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    // 4:2:0: luma sampled 2x2 relative to both chroma planes.
    cinfo.comp_info[0].h_samp_factor = 2;
    cinfo.comp_info[0].v_samp_factor = 2;
    cinfo.comp_info[1].h_samp_factor = cinfo.comp_info[1].v_samp_factor = 1;
    cinfo.comp_info[2].h_samp_factor = cinfo.comp_info[2].v_samp_factor = 1;
    cinfo.dct_method = JDCT_ISLOW;
    jpeg_start_compress(&cinfo, TRUE);
    std::vector<JSAMPLE> row(std::size_t(img.width()) * 3);
    while (cinfo.next_scanline < cinfo.image_height) {
        const int y = int(cinfo.next_scanline);
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c) row[std::size_t(x) * 3 + c] = to_byte(img(x, y, c));
        JSAMPROW ptr = row.data();
        jpeg_write_scanlines(&cinfo, &ptr, 1);
    }
    jpeg_finish_compress(&cinfo);
    Bytes out(mem, mem + mem_size);
    jpeg_destroy_compress(&cinfo);
    std::free(mem);
    return out;
}

Imagef decode_jpeg(std::span<const std::uint8_t> bytes) {
    jpeg_decompress_struct cinfo;
    JpegErrorManager err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw InputError(std::string("JPEG decode failed: ") + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    Imagef img(int(cinfo.output_width), int(cinfo.output_height), 3);
    std::vector<JSAMPLE> row(std::size_t(cinfo.output_width) * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        const int y = int(cinfo.output_scanline);
        JSAMPROW ptr = row.data();
        jpeg_read_scanlines(&cinfo, &ptr, 1);
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c) img(x, y, c) = row[std::size_t(x) * 3 + c] / 255.0f;
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

Imagef read_color(const std::filesystem::path& path) {
    const Bytes bytes = read_file(path);
    Imagef img;
    if (is_png(bytes)) {
        img = decode_png(bytes);
    } else if (is_jpeg(bytes)) {
        img = decode_jpeg(bytes);
    } else {
        throw InputError("unsupported color image format: " + path.string());
    }
    if (img.channels() == 1) {
        Imagef rgb(img.width(), img.height(), 3);
        rgb.data() = img.data().replicate(3, 1);
        return rgb;
    }
    return img;
}

Imagef read_pfm(const std::filesystem::path& path) { return parse_pfm(read_file(path)); }

void write_pfm(const std::filesystem::path& path, const Imagef& image) {
    if (image.channels() != 1 && image.channels() != 3) throw InputError("PFM output needs 1 or 3 channels");
    std::ostringstream header;
    header << (image.channels() == 3 ? "PF" : "Pf") << "\n" << image.width() << " " << image.height() << "\n-1.0\n";
    std::string h = header.str();
    Bytes out(h.begin(), h.end());
    for (int row = 0; row < image.height(); ++row) {
        const int y = image.height() - 1 - row;
        for (int x = 0; x < image.width(); ++x)
            for (int c = 0; c < image.channels(); ++c) {
                float v = image(x, y, c);
                std::uint8_t raw[4];
                std::memcpy(raw, &v, 4);
                out.insert(out.end(), raw, raw + 4);
            }
    }
    write_file(path, out);
}

DisparityImage read_disparity(const std::filesystem::path& path) {
    const Bytes bytes = read_file(path);
    Imagef img;
    if (is_png(bytes)) {
        img = decode_png(bytes);
        if (img.channels() != 1) throw InputError("disparity PNG must be grayscale");
    } else if (is_pfm(bytes)) {
        img = parse_pfm(bytes);
        if (img.channels() != 1) throw InputError("disparity PFM must have one channel");
        if (!img.data().allFinite()) throw InputError("disparity PFM contains non-finite values");
        const float lo = img.data().minCoeff();
        const float hi = img.data().maxCoeff();
        if (lo < 0.0f) throw InputError("disparity PFM contains negative values");
        if (hi > 0.0f) img.data() /= hi;
    } else {
        throw InputError("unsupported disparity format: " + path.string());
    }
    return to_disparity(img);
}

}  // namespace ldiphoto::io
