#pragma once

#include <functional>
#include <vector>

#include "plab/clip.hpp"
#include "plab/encoder.hpp"
#include "plab/error.hpp"
#include "plab/hog.hpp"

namespace plab {

// Frame-averaging baselines: a per-frame descriptor is computed for every
// frame and the arithmetic mean over frames is the activity feature.

using FrameEncoder = std::function<std::vector<float>(const Frame&)>;

inline ActivityFeature frame_avg_encode(const VideoClip& clip, const FrameEncoder& enc) {
    if (clip.frames.empty()) throw UsageError("frame_avg_encode: empty clip");
    std::vector<double> acc;
    for (const Frame& f : clip.frames) {
        const std::vector<float> v = enc(f);
        if (acc.empty()) acc.assign(v.size(), 0.0);
        if (v.size() != acc.size())
            throw Error("frame_avg_encode: per-frame descriptor dims differ");
        for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
    }
    ActivityFeature feat;
    feat.values.resize(acc.size());
    const double inv = 1.0 / static_cast<double>(clip.frames.size());
    for (std::size_t i = 0; i < acc.size(); ++i)
        feat.values[i] = static_cast<float>(acc[i] * inv);
    return feat;
}

// Baseline-1: a fixed conv-pool x4 2D stack with frozen, seeded random
// weights, applied per frame. Reuses the 3D machinery on single-frame
// volumes (temporal pooling window 1).
class Baseline1 {
public:
    Baseline1(int input_h, int input_w, std::uint64_t seed) {
        cfg_.input_frames = 1;
        cfg_.input_h = input_h;
        cfg_.input_w = input_w;
        cfg_.num_classes = 1; // head unused
        cfg_.layers = {
            LayerSpec::conv(8),  LayerSpec::pool(1, 2, 2),
            LayerSpec::conv(16), LayerSpec::pool(1, 2, 2),
            LayerSpec::conv(32), LayerSpec::pool(1, 2, 2),
            LayerSpec::conv(32), LayerSpec::pool(1, 2, 2),
        };
        weights_ = init_weights<float>(cfg_, seed);
    }

    std::size_t dim() const { return feature_dim(cfg_); }

    std::vector<float> operator()(const Frame& frame) const {
        VideoClip one;
        one.frames.push_back(frame);
        check_preprocessed<float>(one, cfg_);
        Tensor4<float> out = forward_stack(clip_to_tensor<float>(one), cfg_, weights_);
        return std::move(out.data);
    }

    const EncoderConfig& config() const { return cfg_; }

private:
    EncoderConfig cfg_;
    WeightBundle weights_;
};

inline ActivityFeature baseline1_encode(const VideoClip& clip, const Baseline1& b1) {
    return frame_avg_encode(clip, [&b1](const Frame& f) { return b1(f); });
}

// Baseline-2: frame-averaged HOG descriptors.
inline ActivityFeature baseline2_encode(const VideoClip& clip, const HogParams& params = {}) {
    return frame_avg_encode(clip, [&params](const Frame& f) { return hog_descriptor(f, params); });
}

} // namespace plab
