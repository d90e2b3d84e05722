#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "plab/clip.hpp"
#include "plab/encoder.hpp"
#include "plab/error.hpp"

namespace plab {

// Perceptual reward: the negative Euclidean distance between two activity
// features. The optimizer cost is the squared distance, so argmax reward
// and argmin cost agree on any candidate set.

inline double squared_distance(const ActivityFeature& a, const ActivityFeature& b) {
    if (a.dim() != b.dim())
        throw UsageError("feature dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = static_cast<double>(a.values[i]) - static_cast<double>(b.values[i]);
        acc += d * d;
    }
    return acc;
}

// r = -||x_d - x_r||_2, always <= 0, zero only for identical features.
inline double reward(const ActivityFeature& x_d, const ActivityFeature& x_r) {
    return -std::sqrt(squared_distance(x_d, x_r));
}

// c = ||x_d - x_r||^2 = r^2, always >= 0.
inline double cost(const ActivityFeature& x_d, const ActivityFeature& x_r) {
    return squared_distance(x_d, x_r);
}

using ClipEncoder = std::function<ActivityFeature(const VideoClip&)>;

// Sliding-window similarity diagnostic: the same window start is taken in
// both clips, each window is encoded, and the reward is emitted per start.
inline std::vector<double> reward_profile(const VideoClip& demo, const VideoClip& trial,
                                          const ClipEncoder& encoder, std::size_t window = 16,
                                          std::size_t stride = 1) {
    if (window < 1 || stride < 1) throw UsageError("reward_profile: window/stride must be >= 1");
    const std::size_t min_len = std::min(demo.size(), trial.size());
    if (min_len < window)
        throw InputError("reward_profile: clip shorter than window (" + std::to_string(min_len) +
                         " < " + std::to_string(window) + ")");
    std::vector<double> out;
    for (std::size_t s = 0; s + window <= min_len; s += stride) {
        VideoClip wd, wt;
        wd.fps = demo.fps;
        wt.fps = trial.fps;
        wd.frames.assign(demo.frames.begin() + s, demo.frames.begin() + s + window);
        wt.frames.assign(trial.frames.begin() + s, trial.frames.begin() + s + window);
        out.push_back(reward(encoder(wd), encoder(wt)));
    }
    return out;
}

} // namespace plab
