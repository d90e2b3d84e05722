#pragma once

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "plab/clip.hpp"
#include "plab/config.hpp"
#include "plab/error.hpp"

namespace plab {

// Clip-on-disk format: a directory of frame_00000.png, frame_00001.png, ...
// (8-bit RGB) plus manifest.txt with `count=`, `fps=`, `width=`, `height=`
// lines. PNGs are written with a fixed filter and compression level so that
// identical pixel data always produces identical bytes.

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] inline void png_error_fn(png_structp png, png_const_charp msg) {
    (void)png;
    throw FormatError(std::string("png: ") + msg);
}

inline void png_warn_fn(png_structp, png_const_charp) {}

} // namespace detail

inline void save_frame_png(const Frame& frame, const std::string& path) {
    detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw FormatError("cannot open for writing: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              detail::png_error_fn, detail::png_warn_fn);
    if (!png) throw FormatError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw FormatError("png_create_info_struct failed");
    }

    std::vector<unsigned char> bytes(static_cast<std::size_t>(frame.height) * frame.width * 3);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const float v = std::clamp(frame.pixels[i], 0.0f, 1.0f);
        bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }
    std::vector<png_bytep> rows(frame.height);
    for (int r = 0; r < frame.height; ++r) {
        rows[r] = bytes.data() + static_cast<std::size_t>(r) * frame.width * 3;
    }

    try {
        png_init_io(png, fp.get());
        png_set_IHDR(png, info, frame.width, frame.height, 8, PNG_COLOR_TYPE_RGB,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_set_filter(png, 0, PNG_FILTER_NONE);
        png_set_compression_level(png, 6);
        png_write_info(png, info);
        png_write_image(png, rows.data());
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
}

// Accepts any PNG libpng can normalize to 8-bit RGB (palette, grayscale,
// alpha, 16-bit), so externally produced frame sequences import cleanly.
inline Frame load_frame_png(const std::string& path) {
    detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw FormatError("cannot open: " + path);

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw FormatError("not a PNG file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             detail::png_error_fn, detail::png_warn_fn);
    if (!png) throw FormatError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw FormatError("png_create_info_struct failed");
    }

    Frame frame;
    try {
        png_init_io(png, fp.get());
        png_set_sig_bytes(png, 8);
        png_read_info(png, info);

        const png_byte color_type = png_get_color_type(png, info);
        const png_byte bit_depth = png_get_bit_depth(png, info);
        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
        if (bit_depth == 16) png_set_strip_16(png);
        if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
            png_set_gray_to_rgb(png);
        png_set_strip_alpha(png);
        png_read_update_info(png, info);

        const int h = static_cast<int>(png_get_image_height(png, info));
        const int w = static_cast<int>(png_get_image_width(png, info));
        frame = Frame(h, w);
        std::vector<unsigned char> bytes(static_cast<std::size_t>(h) * w * 3);
        std::vector<png_bytep> rows(h);
        for (int r = 0; r < h; ++r) rows[r] = bytes.data() + static_cast<std::size_t>(r) * w * 3;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
        for (std::size_t i = 0; i < bytes.size(); ++i) {
            frame.pixels[i] = static_cast<float>(bytes[i]) / 255.0f;
        }
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return frame;
}

inline std::string frame_filename(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%05zu.png", index);
    return buf;
}

inline void save_clip(const VideoClip& clip, const std::string& dir) {
    if (clip.frames.empty()) throw UsageError("save_clip: empty clip");
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (std::size_t i = 0; i < clip.frames.size(); ++i) {
        if (!clip.frames[i].same_size(clip.frames.front()))
            throw UsageError("save_clip: frames differ in resolution");
        save_frame_png(clip.frames[i], (fs::path(dir) / frame_filename(i)).string());
    }
    std::ofstream manifest(fs::path(dir) / "manifest.txt", std::ios::binary);
    if (!manifest) throw FormatError("cannot write manifest in " + dir);
    manifest << "count=" << clip.frames.size() << "\n";
    manifest << "fps=" << detail::fmt_double(clip.fps) << "\n";
    manifest << "width=" << clip.frames.front().width << "\n";
    manifest << "height=" << clip.frames.front().height << "\n";
}

inline VideoClip load_clip(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path manifest_path = fs::path(dir) / "manifest.txt";
    std::ifstream manifest(manifest_path);
    if (!manifest) throw FormatError("missing manifest.txt in " + dir);

    long count = -1, width = -1, height = -1;
    double fps = -1.0;
    std::string line;
    while (std::getline(manifest, line)) {
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("malformed manifest line in " + dir + ": " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        try {
            if (key == "count") count = std::stol(value);
            else if (key == "fps") fps = std::stod(value);
            else if (key == "width") width = std::stol(value);
            else if (key == "height") height = std::stol(value);
        } catch (const std::exception&) {
            throw FormatError("malformed manifest value in " + dir + ": " + line);
        }
    }
    if (count < 1 || width < 1 || height < 1 || fps < 0.0)
        throw FormatError("incomplete manifest in " + dir);

    VideoClip clip;
    clip.fps = fps;
    clip.frames.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        const fs::path p = fs::path(dir) / frame_filename(static_cast<std::size_t>(i));
        if (!fs::exists(p)) throw FormatError("missing frame file: " + p.string());
        Frame f = load_frame_png(p.string());
        if (f.width != width || f.height != height)
            throw FormatError("frame resolution mismatch vs manifest: " + p.string());
        clip.frames.push_back(std::move(f));
    }
    return clip;
}

} // namespace plab
