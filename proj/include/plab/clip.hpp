#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "plab/error.hpp"

namespace plab {

// Single RGB image. Pixels are reals in [0,1], row-major, channel order
// R,G,B. 8-bit files convert as v/255 on load and round(v*255) on save.
struct Frame {
    int height = 0;
    int width = 0;
    std::vector<float> pixels; // height * width * 3

    Frame() = default;
    Frame(int h, int w) : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * 3, 0.0f) {
        if (h < 1 || w < 1) throw UsageError("frame dimensions must be >= 1");
    }

    static Frame filled(int h, int w, float r, float g, float b) {
        Frame f(h, w);
        for (std::size_t i = 0; i < f.pixels.size(); i += 3) {
            f.pixels[i] = r;
            f.pixels[i + 1] = g;
            f.pixels[i + 2] = b;
        }
        return f;
    }

    float& at(int row, int col, int ch) {
        return pixels[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
    }
    float at(int row, int col, int ch) const {
        return pixels[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
    }

    bool same_size(const Frame& other) const {
        return height == other.height && width == other.width;
    }
};

// Ordered frame sequence; fps is metadata only. All frames share one
// resolution (checked where clips enter the system).
struct VideoClip {
    std::vector<Frame> frames;
    double fps = 16.0;

    std::size_t size() const { return frames.size(); }
    int height() const { return frames.empty() ? 0 : frames.front().height; }
    int width() const { return frames.empty() ? 0 : frames.front().width; }
};

// Uniform temporal sampling: frame i of the result is source frame
// floor(i*T/n). Exact when n divides T, repeats indices when T < n, and is
// the identity when T == n.
inline VideoClip downsample_uniform(const VideoClip& clip, std::size_t n) {
    const std::size_t t = clip.frames.size();
    if (t < 1) throw UsageError("downsample_uniform: clip has no frames");
    if (n < 1) throw UsageError("downsample_uniform: n must be >= 1");
    VideoClip out;
    out.fps = clip.fps;
    out.frames.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.frames.push_back(clip.frames[i * t / n]);
    }
    return out;
}

// Clockwise rotation by 90 degrees: source pixel (r,c) lands at (c, H-1-r).
inline Frame rotate_quarter_cw(const Frame& f) {
    Frame out(f.width, f.height);
    for (int r = 0; r < f.height; ++r) {
        for (int c = 0; c < f.width; ++c) {
            for (int ch = 0; ch < 3; ++ch) {
                out.at(c, f.height - 1 - r, ch) = f.at(r, c, ch);
            }
        }
    }
    return out;
}

inline Frame rotate_frame(const Frame& frame, int quarter_turns) {
    int turns = quarter_turns % 4;
    if (turns < 0) turns += 4;
    Frame out = frame;
    for (int i = 0; i < turns; ++i) out = rotate_quarter_cw(out);
    return out;
}

// (r,g,b) -> (b,g,r) per pixel; an involution.
inline Frame swap_rb(const Frame& frame) {
    Frame out = frame;
    for (std::size_t i = 0; i < out.pixels.size(); i += 3) {
        std::swap(out.pixels[i], out.pixels[i + 2]);
    }
    return out;
}

// Bilinear resize with half-pixel-center alignment:
//   src = (dst + 0.5) * in/out - 0.5, neighbors clamped at the borders.
inline Frame resize_bilinear(const Frame& frame, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1) throw UsageError("resize_bilinear: output dims must be >= 1");
    Frame out(out_h, out_w);
    const double sy = static_cast<double>(frame.height) / out_h;
    const double sx = static_cast<double>(frame.width) / out_w;
    for (int r = 0; r < out_h; ++r) {
        const double srcy = (r + 0.5) * sy - 0.5;
        const int y0 = static_cast<int>(std::floor(srcy));
        const double fy = srcy - y0;
        const int ya = std::clamp(y0, 0, frame.height - 1);
        const int yb = std::clamp(y0 + 1, 0, frame.height - 1);
        for (int c = 0; c < out_w; ++c) {
            const double srcx = (c + 0.5) * sx - 0.5;
            const int x0 = static_cast<int>(std::floor(srcx));
            const double fx = srcx - x0;
            const int xa = std::clamp(x0, 0, frame.width - 1);
            const int xb = std::clamp(x0 + 1, 0, frame.width - 1);
            for (int ch = 0; ch < 3; ++ch) {
                const double top = (1.0 - fx) * frame.at(ya, xa, ch) + fx * frame.at(ya, xb, ch);
                const double bot = (1.0 - fx) * frame.at(yb, xa, ch) + fx * frame.at(yb, xb, ch);
                const double v = (1.0 - fy) * top + fy * bot;
                out.at(r, c, ch) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        }
    }
    return out;
}

inline VideoClip map_frames(const VideoClip& clip, const auto& fn) {
    VideoClip out;
    out.fps = clip.fps;
    out.frames.reserve(clip.frames.size());
    for (const auto& f : clip.frames) out.frames.push_back(fn(f));
    return out;
}

} // namespace plab
