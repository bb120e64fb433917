#pragma once

// 8-bit PNG (gray or RGB) and binary PGM/PPM (P5/P6, maxval 255).
// Decoded values are byte / 255.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "refdeblur/core/tensor.hpp"
#include "refdeblur/io/binary.hpp"

namespace refdeblur::io {

namespace detail {

inline std::string lower_ext(const std::filesystem::path& p) {
    std::string e = p.extension().string();
    std::ranges::transform(e, e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e;
}

inline ImageBuf from_interleaved(const std::vector<unsigned char>& px, std::size_t h, std::size_t w, std::size_t c) {
    std::vector<float> v(h * w * c);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t ch = 0; ch < c; ++ch)
                v[(ch * h + y) * w + x] = static_cast<float>(px[(y * w + x) * c + ch]) / 255.0f;
    return ImageBuf(h, w, c, std::move(v));
}

inline std::vector<unsigned char> to_interleaved(const ImageBuf& img) {
    const std::size_t h = img.height(), w = img.width(), c = img.channels();
    std::vector<unsigned char> px(h * w * c);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t ch = 0; ch < c; ++ch)
                px[(y * w + x) * c + ch] =
                    static_cast<unsigned char>(std::lround(std::clamp(img(x, y, ch), 0.0f, 1.0f) * 255.0f));
    return px;
}

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports through these instead of stderr; the message becomes the LoadError text.
inline thread_local std::string png_message;
inline void png_on_error(png_structp png, png_const_charp msg) {
    png_message = msg ? msg : "unknown libpng error";
    png_longjmp(png, 1);
}
inline void png_on_warning(png_structp, png_const_charp) {}

inline ImageBuf read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw LoadError("cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_on_error, png_on_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw LoadError("libpng initialisation failed");
    }
    std::vector<unsigned char> px;
    std::vector<png_bytep> rows;
    png_uint_32 w = 0, h = 0;
    int channels = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw LoadError(path.string() + ": corrupt PNG (" + png_message + ")");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    w = png_get_image_width(png, info);
    h = png_get_image_height(png, info);
    const int depth = png_get_bit_depth(png, info);
    const int type = png_get_color_type(png, info);
    if (depth == 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw LoadError(path.string() + ": 16-bit PNG is not supported");
    }
    if (type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw LoadError(path.string() + ": unsupported PNG channel layout");
    }
    px.resize(static_cast<std::size_t>(w) * h * static_cast<std::size_t>(channels));
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = px.data() + static_cast<std::size_t>(y) * w * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return from_interleaved(px, h, w, static_cast<std::size_t>(channels));
}

inline void write_png(const std::filesystem::path& path, const ImageBuf& img) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw LoadError("cannot open " + path.string() + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_on_error, png_on_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw LoadError("libpng initialisation failed");
    }
    auto px = to_interleaved(img);
    std::vector<png_bytep> rows(img.height());
    for (std::size_t y = 0; y < img.height(); ++y) rows[y] = px.data() + y * img.width() * img.channels();
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw LoadError("failed writing " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
                 img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

inline ImageBuf read_pnm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw LoadError("cannot open " + path.string());
    auto token = [&]() {
        std::string t;
        char ch;
        while (is.get(ch)) {
            if (ch == '#') {
                std::string comment;
                std::getline(is, comment);
            } else if (std::isspace(static_cast<unsigned char>(ch))) {
                if (!t.empty()) break;
            } else {
                t.push_back(ch);
            }
        }
        return t;
    };
    const std::string magic = token();
    if (magic != "P5" && magic != "P6") throw LoadError(path.string() + ": only binary P5/P6 are supported");
    std::size_t w = 0, h = 0, maxval = 0;
    try {
        w = std::stoul(token());
        h = std::stoul(token());
        maxval = std::stoul(token());
    } catch (const std::exception&) {
        throw LoadError(path.string() + ": malformed PNM header");
    }
    if (maxval != 255) throw LoadError(path.string() + ": only 8-bit PNM (maxval 255) is supported");
    const std::size_t c = magic == "P5" ? 1 : 3;
    std::vector<unsigned char> px(w * h * c);
    is.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (static_cast<std::size_t>(is.gcount()) != px.size()) throw LoadError(path.string() + ": truncated PNM data");
    return from_interleaved(px, h, w, c);
}

inline void write_pnm(const std::filesystem::path& path, const ImageBuf& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw LoadError("cannot open " + path.string() + " for writing");
    os << (img.channels() == 1 ? "P5" : "P6") << '\n' << img.width() << ' ' << img.height() << "\n255\n";
    const auto px = to_interleaved(img);
    os.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!os) throw LoadError("failed writing " + path.string());
}

}  // namespace detail

[[nodiscard]] inline bool is_image_file(const std::filesystem::path& p) {
    const auto e = detail::lower_ext(p);
    return e == ".png" || e == ".ppm" || e == ".pgm";
}

/// Dispatches on extension: .png, .ppm, .pgm.
inline ImageBuf load_image(const std::filesystem::path& path) {
    const auto e = detail::lower_ext(path);
    if (e == ".png") return detail::read_png(path);
    if (e == ".ppm" || e == ".pgm") return detail::read_pnm(path);
    throw LoadError(path.string() + ": unsupported image extension");
}

inline void save_image(const std::filesystem::path& path, const ImageBuf& img) {
    const auto e = detail::lower_ext(path);
    if (e == ".png") return detail::write_png(path, img);
    if (e == ".ppm" || e == ".pgm") {
        if ((e == ".pgm") != (img.channels() == 1)) {
            throw ContractViolation(path.string() + ": extension does not match channel count");
        }
        return detail::write_pnm(path, img);
    }
    throw LoadError(path.string() + ": unsupported image extension");
}

}  // namespace refdeblur::io
