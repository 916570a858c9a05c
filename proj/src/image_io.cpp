// Copyright (c) 2026 The camcond Authors
// SPDX-License-Identifier: Apache-2.0

#include "camcond/image_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <sstream>

#include "camcond/error.hpp"
#include "camcond/io_util.hpp"

namespace camcond {

namespace fs = std::filesystem;

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw IoError("cannot open " + path.string());
    return f;
}

// libpng error handling: capture the message, then longjmp back to the
// caller's setjmp point. No C++ objects with destructors may live in
// frames between setjmp and the failing libpng call.
void capture_error_fn(png_structp png, png_const_charp msg) {
    auto* out = static_cast<std::string*>(png_get_error_ptr(png));
    if (out) *out = msg;
    png_longjmp(png, 1);
}

void quiet_warn_fn(png_structp, png_const_charp) {}

struct PngReadGuard {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReadGuard() {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
    }
};

struct PngWriteGuard {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriteGuard() {
        if (png) png_destroy_write_struct(&png, &info);
    }
};

// Plain-type locals only; may be abandoned by longjmp.
template <typename T>
void read_rows(png_structp png, Image<T>& image) {
    for (int y = 0; y < image.height; ++y)
        png_read_row(png, reinterpret_cast<png_bytep>(image.data.data() + image.index(0, y)),
                     nullptr);
    png_read_end(png, nullptr);
}

template <typename T>
void write_rows(png_structp png, const Image<T>& image) {
    for (int y = 0; y < image.height; ++y)
        png_write_row(png, reinterpret_cast<png_bytep>(
                               const_cast<T*>(image.data.data() + image.index(0, y))));
    png_write_end(png, nullptr);
}

template <typename T>
Image<T> read_png_impl(const fs::path& path, int want_bit_depth) {
    FilePtr file = open_file(path, "rb");
    std::string error_message;
    Image<T> image;
    PngReadGuard g;

    g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error_message, capture_error_fn,
                                   quiet_warn_fn);
    if (!g.png) throw IoError("png: allocation failed");
    g.info = png_create_info_struct(g.png);
    if (!g.info) throw IoError("png: allocation failed");

    if (setjmp(png_jmpbuf(g.png)))
        throw FormatError(path.string() + ": " + (error_message.empty() ? "corrupt PNG" : error_message));

    png_init_io(g.png, file.get());
    png_read_info(g.png, g.info);

    const int w = static_cast<int>(png_get_image_width(g.png, g.info));
    const int h = static_cast<int>(png_get_image_height(g.png, g.info));
    const int bit_depth = png_get_bit_depth(g.png, g.info);
    const int color_type = png_get_color_type(g.png, g.info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(g.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(g.png);
    if (png_get_valid(g.png, g.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(g.png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(g.png);
    if (want_bit_depth == 8 && bit_depth == 16)
        throw FormatError(path.string() + ": expected an 8-bit PNG");
    if (want_bit_depth == 16) {
        if (bit_depth != 16) throw FormatError(path.string() + ": expected a 16-bit PNG");
        png_set_swap(g.png);  // files are big-endian, we want host order
    }
    png_read_update_info(g.png, g.info);

    const int channels = static_cast<int>(png_get_channels(g.png, g.info));
    if (want_bit_depth == 16 && channels != 1)
        throw FormatError(path.string() + ": expected a single-channel 16-bit PNG");

    image = Image<T>(w, h, channels);
    read_rows(g.png, image);
    return image;
}

template <typename T>
void write_png_impl(const fs::path& path, const Image<T>& image, int bit_depth) {
    if (image.width < 1 || image.height < 1) throw ContractError("png: empty image");
    if (image.channels != 1 && image.channels != 3)
        throw ContractError("png: only 1- or 3-channel images are written");

    atomic_write(path, [&](const fs::path& tmp) {
        FilePtr file = open_file(tmp, "wb");
        std::string error_message;
        PngWriteGuard g;

        g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error_message, capture_error_fn,
                                        quiet_warn_fn);
        if (!g.png) throw IoError("png: allocation failed");
        g.info = png_create_info_struct(g.png);
        if (!g.info) throw IoError("png: allocation failed");

        if (setjmp(png_jmpbuf(g.png)))
            throw IoError(tmp.string() + ": " + (error_message.empty() ? "write failed" : error_message));

        png_init_io(g.png, file.get());
        const int color = image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
        png_set_IHDR(g.png, g.info, static_cast<png_uint_32>(image.width),
                     static_cast<png_uint_32>(image.height), bit_depth, color, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(g.png, g.info);
        if (bit_depth == 16) png_set_swap(g.png);
        write_rows(g.png, image);
    });
}

}  // namespace

Image8 read_png(const fs::path& path) { return read_png_impl<std::uint8_t>(path, 8); }
void write_png(const fs::path& path, const Image8& image) { write_png_impl(path, image, 8); }

Image16 read_png16(const fs::path& path) { return read_png_impl<std::uint16_t>(path, 16); }
void write_png16(const fs::path& path, const Image16& image) {
    if (image.channels != 1) throw ContractError("png16: single channel only");
    write_png_impl(path, image, 16);
}

ImageF read_pfm(const fs::path& path) {
    const std::string bytes = read_file_bytes(path);
    std::istringstream head(bytes.substr(0, std::min<std::size_t>(bytes.size(), 128)));
    std::string magic;
    int w = 0, h = 0;
    double scale = 0.0;
    head >> magic >> w >> h >> scale;
    if (magic != "Pf" || w < 1 || h < 1 || scale == 0.0 || !head)
        throw FormatError(path.string() + ": not a grayscale PFM");
    if (scale > 0.0) throw FormatError(path.string() + ": big-endian PFM not supported");
    // binary data begins after the single whitespace terminating the scale token
    const std::size_t offset = static_cast<std::size_t>(head.tellg()) + 1;
    const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (bytes.size() < offset + count * 4) throw FormatError(path.string() + ": truncated PFM");

    // PFM rows are stored bottom-up
    ImageF image(w, h, 1);
    for (int y = 0; y < h; ++y) {
        const std::size_t src_row = static_cast<std::size_t>(h - 1 - y);
        std::memcpy(image.data.data() + image.index(0, y),
                    bytes.data() + offset + src_row * static_cast<std::size_t>(w) * 4,
                    static_cast<std::size_t>(w) * 4);
    }
    return image;
}

void write_pfm(const fs::path& path, const ImageF& image) {
    if (image.channels != 1) throw ContractError("pfm: single channel only");
    std::string out;
    {
        std::ostringstream head;
        head << "Pf\n" << image.width << " " << image.height << "\n-1.0\n";
        out = head.str();
    }
    const std::size_t row_bytes = static_cast<std::size_t>(image.width) * 4;
    out.reserve(out.size() + row_bytes * static_cast<std::size_t>(image.height));
    for (int y = image.height - 1; y >= 0; --y)
        out.append(reinterpret_cast<const char*>(image.data.data() + image.index(0, y)), row_bytes);
    atomic_write_bytes(path, out);
}

}  // namespace camcond
