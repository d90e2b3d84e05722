#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "plab/clip.hpp"
#include "plab/error.hpp"
#include "plab/rng.hpp"
#include "plab/tensor.hpp"

namespace plab {

// Spatiotemporal convolutional encoder. Every conv layer uses 3x3x3 kernels
// with stride 1, zero padding 1 and a rectifier; pooling is non-overlapping
// max pooling with ceil-mode edges. The flattened output of the last layer
// is the activity feature.

enum class LayerKind { Conv3d, MaxPool3d };

struct LayerSpec {
    LayerKind kind = LayerKind::Conv3d;
    int out_channels = 0; // conv
    int pt = 1, ph = 1, pw = 1; // pool window

    static LayerSpec conv(int out_ch) {
        LayerSpec l;
        l.kind = LayerKind::Conv3d;
        l.out_channels = out_ch;
        return l;
    }
    static LayerSpec pool(int t, int h, int w) {
        LayerSpec l;
        l.kind = LayerKind::MaxPool3d;
        l.pt = t;
        l.ph = h;
        l.pw = w;
        return l;
    }
};

struct EncoderConfig {
    int input_frames = 16;
    int input_h = 112;
    int input_w = 112;
    int num_classes = 5;
    std::vector<LayerSpec> layers;

    // 8 conv + 5 pool layout with the published channel schedule; flattens
    // to 8192 values on a 16x112x112 input.
    static EncoderConfig c3d_full(int classes = 101) {
        EncoderConfig cfg;
        cfg.input_frames = 16;
        cfg.input_h = 112;
        cfg.input_w = 112;
        cfg.num_classes = classes;
        cfg.layers = {
            LayerSpec::conv(64),  LayerSpec::pool(1, 2, 2),
            LayerSpec::conv(128), LayerSpec::pool(2, 2, 2),
            LayerSpec::conv(256), LayerSpec::conv(256), LayerSpec::pool(2, 2, 2),
            LayerSpec::conv(512), LayerSpec::conv(512), LayerSpec::pool(2, 2, 2),
            LayerSpec::conv(512), LayerSpec::conv(512), LayerSpec::pool(2, 2, 2),
        };
        return cfg;
    }

    // Reduced configuration sized for minute-scale experiments: 16x56x56
    // input, channel schedule 8,16,32,64,64, same pooling pattern.
    static EncoderConfig desk(int classes = 5) {
        EncoderConfig cfg;
        cfg.input_frames = 16;
        cfg.input_h = 56;
        cfg.input_w = 56;
        cfg.num_classes = classes;
        cfg.layers = {
            LayerSpec::conv(8),  LayerSpec::pool(1, 2, 2),
            LayerSpec::conv(16), LayerSpec::pool(2, 2, 2),
            LayerSpec::conv(32), LayerSpec::pool(2, 2, 2),
            LayerSpec::conv(64), LayerSpec::pool(2, 2, 2),
            LayerSpec::conv(64), LayerSpec::pool(2, 2, 2),
        };
        return cfg;
    }
};

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

inline Shape4 output_shape(const EncoderConfig& cfg) {
    Shape4 s{3, cfg.input_frames, cfg.input_h, cfg.input_w};
    for (const auto& layer : cfg.layers) {
        if (layer.kind == LayerKind::Conv3d) {
            s.c = layer.out_channels;
        } else {
            s.t = ceil_div(s.t, layer.pt);
            s.h = ceil_div(s.h, layer.ph);
            s.w = ceil_div(s.w, layer.pw);
        }
    }
    return s;
}

inline std::size_t feature_dim(const EncoderConfig& cfg) { return output_shape(cfg).product(); }

// Flat real vector in activity space.
struct ActivityFeature {
    std::vector<float> values;
    std::size_t dim() const { return values.size(); }
};

template <typename S>
struct ConvParams {
    int out_ch = 0;
    int in_ch = 0;
    std::vector<S> kernel; // out_ch * in_ch * 27, (kt,kh,kw) minor
    std::vector<S> bias;   // out_ch

    S kernel_at(int oc, int ic, int kt, int kh, int kw) const {
        return kernel[(((static_cast<std::size_t>(oc) * in_ch + ic) * 3 + kt) * 3 + kh) * 3 + kw];
    }
};

template <typename S>
struct WeightBundleT {
    std::vector<ConvParams<S>> convs;
    std::vector<S> head_w; // num_classes x feature_dim, row-major
    std::vector<S> head_b; // num_classes

    template <typename T>
    WeightBundleT<T> cast() const {
        WeightBundleT<T> out;
        out.convs.reserve(convs.size());
        for (const auto& cp : convs) {
            ConvParams<T> c;
            c.out_ch = cp.out_ch;
            c.in_ch = cp.in_ch;
            c.kernel.assign(cp.kernel.begin(), cp.kernel.end());
            c.bias.assign(cp.bias.begin(), cp.bias.end());
            out.convs.push_back(std::move(c));
        }
        out.head_w.assign(head_w.begin(), head_w.end());
        out.head_b.assign(head_b.begin(), head_b.end());
        return out;
    }
};

using WeightBundle = WeightBundleT<float>;

// Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases, seeded.
template <typename S = float>
WeightBundleT<S> init_weights(const EncoderConfig& cfg, std::uint64_t seed) {
    WeightBundleT<S> wb;
    Rng rng(mix_seed(seed, 0x57454947ull));
    int in_ch = 3;
    for (const auto& layer : cfg.layers) {
        if (layer.kind != LayerKind::Conv3d) continue;
        ConvParams<S> cp;
        cp.in_ch = in_ch;
        cp.out_ch = layer.out_channels;
        cp.kernel.resize(static_cast<std::size_t>(cp.out_ch) * cp.in_ch * 27);
        cp.bias.assign(cp.out_ch, S(0));
        const double fan_in = cp.in_ch * 27.0;
        const double fan_out = cp.out_ch * 27.0;
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (auto& v : cp.kernel) v = static_cast<S>(rng.uniform(-bound, bound));
        in_ch = cp.out_ch;
        wb.convs.push_back(std::move(cp));
    }
    const std::size_t feat = feature_dim(cfg);
    const double bound = std::sqrt(6.0 / (static_cast<double>(feat) + cfg.num_classes));
    wb.head_w.resize(feat * cfg.num_classes);
    for (auto& v : wb.head_w) v = static_cast<S>(rng.uniform(-bound, bound));
    wb.head_b.assign(cfg.num_classes, S(0));
    return wb;
}

template <typename S>
void validate_weights(const EncoderConfig& cfg, const WeightBundleT<S>& wb) {
    std::size_t conv_idx = 0;
    int in_ch = 3;
    for (const auto& layer : cfg.layers) {
        if (layer.kind != LayerKind::Conv3d) continue;
        if (conv_idx >= wb.convs.size()) throw ConfigError("weight bundle: missing conv tensors");
        const auto& cp = wb.convs[conv_idx];
        if (cp.in_ch != in_ch || cp.out_ch != layer.out_channels ||
            cp.kernel.size() != static_cast<std::size_t>(cp.out_ch) * cp.in_ch * 27 ||
            cp.bias.size() != static_cast<std::size_t>(cp.out_ch))
            throw ConfigError("weight bundle: conv tensor shape mismatch at layer " +
                              std::to_string(conv_idx));
        in_ch = layer.out_channels;
        ++conv_idx;
    }
    if (conv_idx != wb.convs.size()) throw ConfigError("weight bundle: extra conv tensors");
    const std::size_t feat = feature_dim(cfg);
    if (wb.head_w.size() != feat * cfg.num_classes ||
        wb.head_b.size() != static_cast<std::size_t>(cfg.num_classes))
        throw ConfigError("weight bundle: classifier head shape mismatch");
}

// Zero-pads by 1 on T, H and W so the conv loops run branch-free.
template <typename S>
Tensor4<S> pad1(const Tensor4<S>& x) {
    Tensor4<S> out(x.c, x.t + 2, x.h + 2, x.w + 2);
    for (int c = 0; c < x.c; ++c)
        for (int t = 0; t < x.t; ++t)
            for (int h = 0; h < x.h; ++h)
                std::copy_n(x.row(c, t, h), x.w, out.row(c, t + 1, h + 1) + 1);
    return out;
}

// Cross-correlation, stride 1, padding 1, same-size output; optional
// rectifier. The inner loop is a 3-tap fused accumulation over contiguous W.
template <typename S>
Tensor4<S> conv3d_forward(const Tensor4<S>& x, const ConvParams<S>& p, bool relu) {
    if (x.c != p.in_ch)
        throw ConfigError("conv3d_forward: input has " + std::to_string(x.c) +
                          " channels, kernel expects " + std::to_string(p.in_ch));
    const Tensor4<S> px = pad1(x);
    Tensor4<S> out(p.out_ch, x.t, x.h, x.w);
    const int T = x.t, H = x.h, W = x.w;
    for (int oc = 0; oc < p.out_ch; ++oc) {
        const S b = p.bias[oc];
        S* obase = out.data.data() + out.index(oc, 0, 0, 0);
        std::fill_n(obase, static_cast<std::size_t>(T) * H * W, b);
        for (int ic = 0; ic < p.in_ch; ++ic) {
            for (int kt = 0; kt < 3; ++kt) {
                for (int kh = 0; kh < 3; ++kh) {
                    const S* krow =
                        p.kernel.data() +
                        (((static_cast<std::size_t>(oc) * p.in_ch + ic) * 3 + kt) * 3 + kh) * 3;
                    const S k0 = krow[0], k1 = krow[1], k2 = krow[2];
                    for (int t = 0; t < T; ++t) {
                        for (int h = 0; h < H; ++h) {
                            const S* src = px.row(ic, t + kt, h + kh);
                            S* dst = out.row(oc, t, h);
                            for (int w = 0; w < W; ++w) {
                                dst[w] += k0 * src[w] + k1 * src[w + 1] + k2 * src[w + 2];
                            }
                        }
                    }
                }
            }
        }
    }
    if (relu) {
        for (auto& v : out.data) v = std::max(v, S(0));
    }
    return out;
}

// Non-overlapping max pooling; ragged edges keep their partial windows.
template <typename S>
Tensor4<S> maxpool3d_forward(const Tensor4<S>& x, int pt, int ph, int pw) {
    if (pt < 1 || ph < 1 || pw < 1) throw UsageError("maxpool3d_forward: window dims must be >= 1");
    Tensor4<S> out(x.c, ceil_div(x.t, pt), ceil_div(x.h, ph), ceil_div(x.w, pw));
    for (int c = 0; c < x.c; ++c) {
        for (int ot = 0; ot < out.t; ++ot) {
            const int t0 = ot * pt, t1 = std::min(t0 + pt, x.t);
            for (int oh = 0; oh < out.h; ++oh) {
                const int h0 = oh * ph, h1 = std::min(h0 + ph, x.h);
                for (int ow = 0; ow < out.w; ++ow) {
                    const int w0 = ow * pw, w1 = std::min(w0 + pw, x.w);
                    S best = x.at(c, t0, h0, w0);
                    for (int t = t0; t < t1; ++t)
                        for (int h = h0; h < h1; ++h)
                            for (int w = w0; w < w1; ++w) best = std::max(best, x.at(c, t, h, w));
                    out.at(c, ot, oh, ow) = best;
                }
            }
        }
    }
    return out;
}

// RGB clip -> (3, T, H, W) volume.
template <typename S>
Tensor4<S> clip_to_tensor(const VideoClip& clip) {
    const int T = static_cast<int>(clip.frames.size());
    const int H = clip.height(), W = clip.width();
    Tensor4<S> x(3, T, H, W);
    for (int t = 0; t < T; ++t) {
        const Frame& f = clip.frames[t];
        for (int h = 0; h < H; ++h)
            for (int w = 0; w < W; ++w)
                for (int c = 0; c < 3; ++c) x.at(c, t, h, w) = static_cast<S>(f.at(h, w, c));
    }
    return x;
}

template <typename S>
Tensor4<S> forward_stack(Tensor4<S> x, const EncoderConfig& cfg, const WeightBundleT<S>& wb) {
    std::size_t conv_idx = 0;
    for (const auto& layer : cfg.layers) {
        if (layer.kind == LayerKind::Conv3d) {
            x = conv3d_forward(x, wb.convs[conv_idx++], /*relu=*/true);
        } else {
            x = maxpool3d_forward(x, layer.pt, layer.ph, layer.pw);
        }
    }
    return x;
}

template <typename S>
void check_preprocessed(const VideoClip& clip, const EncoderConfig& cfg) {
    if (static_cast<int>(clip.frames.size()) != cfg.input_frames)
        throw InputError("encode: clip has " + std::to_string(clip.frames.size()) +
                         " frames, encoder expects " + std::to_string(cfg.input_frames));
    if (clip.height() != cfg.input_h || clip.width() != cfg.input_w)
        throw InputError("encode: clip resolution " + std::to_string(clip.height()) + "x" +
                         std::to_string(clip.width()) + " does not match encoder input " +
                         std::to_string(cfg.input_h) + "x" + std::to_string(cfg.input_w));
}

// Runs the layer stack and flattens the final feature map. The clip must
// already be downsampled to cfg.input_frames and sized to the input
// resolution.
inline ActivityFeature encode(const VideoClip& clip, const EncoderConfig& cfg,
                              const WeightBundle& wb) {
    check_preprocessed<float>(clip, cfg);
    validate_weights(cfg, wb);
    Tensor4<float> out = forward_stack(clip_to_tensor<float>(clip), cfg, wb);
    ActivityFeature feat;
    feat.values = std::move(out.data);
    return feat;
}

template <typename S>
std::vector<S> softmax(const std::vector<S>& logits) {
    std::vector<S> p(logits.size());
    S mx = logits[0];
    for (S v : logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double e = std::exp(static_cast<double>(logits[i] - mx));
        p[i] = static_cast<S>(e);
        sum += e;
    }
    for (auto& v : p) v = static_cast<S>(v / sum);
    return p;
}

template <typename S>
std::vector<S> head_logits(const std::vector<S>& feat, const EncoderConfig& cfg,
                           const WeightBundleT<S>& wb) {
    std::vector<S> logits(cfg.num_classes);
    const std::size_t n = feat.size();
    for (int k = 0; k < cfg.num_classes; ++k) {
        const S* row = wb.head_w.data() + static_cast<std::size_t>(k) * n;
        double acc = static_cast<double>(wb.head_b[k]);
        for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(row[i]) * feat[i];
        logits[k] = static_cast<S>(acc);
    }
    return logits;
}

// encode -> linear head -> softmax.
inline std::vector<float> classify(const VideoClip& clip, const EncoderConfig& cfg,
                                   const WeightBundle& wb) {
    const ActivityFeature feat = encode(clip, cfg, wb);
    return softmax(head_logits(feat.values, cfg, wb));
}

// Labeled clips rendered by the simulator; the pretraining corpus. The five
// class labels are the task kinds in their canonical order.
struct SyntheticActivityDataset {
    std::vector<VideoClip> clips;
    std::vector<int> labels;
    std::size_t size() const { return clips.size(); }
};

} // namespace plab
