#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "plab/clip.hpp"
#include "plab/error.hpp"

namespace plab {

// Dalal-Triggs histogram of oriented gradients:
//   - luminance (Rec.601), centered differences with replicated borders
//   - 9 unsigned orientation bins over [0, 180); bin centers sit at i*20
//     degrees so an exactly horizontal gradient votes into a single bin
//   - 8x8-pixel cells, 2x2-cell blocks at 1-cell stride
//   - per-block L2-hysteresis normalization (clip 0.2, renormalize)
// Pixels beyond the last full cell are ignored.

struct HogParams {
    int cell = 8;
    int bins = 9;
    int block = 2;    // cells per block side
    double clip = 0.2;
    double eps = 1e-6;
};

inline std::size_t hog_length(int height, int width, const HogParams& p = {}) {
    const int cells_y = height / p.cell;
    const int cells_x = width / p.cell;
    const int blocks_y = cells_y - p.block + 1;
    const int blocks_x = cells_x - p.block + 1;
    if (blocks_y < 1 || blocks_x < 1) return 0;
    return static_cast<std::size_t>(blocks_y) * blocks_x * p.block * p.block * p.bins;
}

inline std::vector<float> hog_descriptor(const Frame& frame, const HogParams& p = {}) {
    const int H = frame.height, W = frame.width;
    const int cells_y = H / p.cell;
    const int cells_x = W / p.cell;
    if (cells_y < p.block || cells_x < p.block)
        throw InputError("hog_descriptor: frame smaller than one block (" +
                         std::to_string(p.block * p.cell) + "x" +
                         std::to_string(p.block * p.cell) + " required)");

    std::vector<double> luma(static_cast<std::size_t>(H) * W);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            luma[static_cast<std::size_t>(y) * W + x] = 0.299 * frame.at(y, x, 0) +
                                                        0.587 * frame.at(y, x, 1) +
                                                        0.114 * frame.at(y, x, 2);
    auto lum = [&](int y, int x) {
        y = std::clamp(y, 0, H - 1);
        x = std::clamp(x, 0, W - 1);
        return luma[static_cast<std::size_t>(y) * W + x];
    };

    // Cell histograms with bilinear orientation votes.
    std::vector<double> hist(static_cast<std::size_t>(cells_y) * cells_x * p.bins, 0.0);
    const double pi = 3.14159265358979323846;
    const double bin_width = pi / p.bins;
    for (int y = 0; y < cells_y * p.cell; ++y) {
        for (int x = 0; x < cells_x * p.cell; ++x) {
            const double gx = lum(y, x + 1) - lum(y, x - 1);
            const double gy = lum(y + 1, x) - lum(y - 1, x);
            const double mag = std::sqrt(gx * gx + gy * gy);
            if (mag == 0.0) continue;
            double ang = std::atan2(gy, gx);
            if (ang < 0.0) ang += pi;       // unsigned orientation
            if (ang >= pi) ang -= pi;
            const double b = ang / bin_width; // bin centers at integer coordinates
            int b0 = static_cast<int>(std::floor(b));
            const double frac = b - b0;
            b0 %= p.bins;
            const int b1 = (b0 + 1) % p.bins;
            const std::size_t cell_base =
                (static_cast<std::size_t>(y / p.cell) * cells_x + (x / p.cell)) * p.bins;
            hist[cell_base + b0] += mag * (1.0 - frac);
            hist[cell_base + b1] += mag * frac;
        }
    }

    const int blocks_y = cells_y - p.block + 1;
    const int blocks_x = cells_x - p.block + 1;
    const int block_len = p.block * p.block * p.bins;
    std::vector<float> out;
    out.reserve(static_cast<std::size_t>(blocks_y) * blocks_x * block_len);
    std::vector<double> v(block_len);
    for (int by = 0; by < blocks_y; ++by) {
        for (int bx = 0; bx < blocks_x; ++bx) {
            int k = 0;
            for (int cy = 0; cy < p.block; ++cy)
                for (int cx = 0; cx < p.block; ++cx) {
                    const std::size_t base =
                        (static_cast<std::size_t>(by + cy) * cells_x + (bx + cx)) * p.bins;
                    for (int b = 0; b < p.bins; ++b) v[k++] = hist[base + b];
                }
            double norm = 0.0;
            for (double e : v) norm += e * e;
            norm = std::sqrt(norm + p.eps * p.eps);
            for (auto& e : v) e = std::min(e / norm, p.clip);
            norm = 0.0;
            for (double e : v) norm += e * e;
            norm = std::sqrt(norm + p.eps * p.eps);
            for (double e : v) out.push_back(static_cast<float>(e / norm));
        }
    }
    return out;
}

} // namespace plab
