#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "plab/encoder.hpp"
#include "plab/error.hpp"
#include "plab/rng.hpp"

namespace plab {

// Classifier pretraining: plain minibatch gradient descent on softmax
// cross-entropy, differentiated by hand through conv3d, max pooling, the
// rectifier and the linear head. Single-threaded over minibatches so runs
// are reproducible from the seed alone.

// loss = -log softmax(logits)[label]; grad = softmax(logits) - onehot(label)
template <typename S>
std::pair<S, std::vector<S>> softmax_cross_entropy(const std::vector<S>& logits, int label) {
    if (label < 0 || label >= static_cast<int>(logits.size()))
        throw UsageError("softmax_cross_entropy: label out of range");
    std::vector<S> grad = softmax(logits);
    const double p = std::max(static_cast<double>(grad[label]), 1e-300);
    const S loss = static_cast<S>(-std::log(p));
    grad[label] -= S(1);
    return {loss, std::move(grad)};
}

// dBias, dKernel and dInput of the padded stride-1 convolution. d_out must
// already include the rectifier mask when the layer was activated.
template <typename S>
struct ConvGrads {
    ConvParams<S> params; // gradient tensors, same shapes as the layer
    Tensor4<S> input;     // gradient wrt the layer input
};

template <typename S>
ConvGrads<S> conv3d_backward(const Tensor4<S>& x, const ConvParams<S>& p, const Tensor4<S>& d_out) {
    ConvGrads<S> g;
    g.params.in_ch = p.in_ch;
    g.params.out_ch = p.out_ch;
    g.params.kernel.assign(p.kernel.size(), S(0));
    g.params.bias.assign(p.bias.size(), S(0));
    g.input = Tensor4<S>(x.c, x.t, x.h, x.w);

    const int T = x.t, H = x.h, W = x.w;
    const Tensor4<S> px = pad1(x);
    const Tensor4<S> pd = pad1(d_out);

    for (int oc = 0; oc < p.out_ch; ++oc) {
        double bias_acc = 0.0;
        const S* obase = d_out.data.data() + d_out.index(oc, 0, 0, 0);
        const std::size_t plane = static_cast<std::size_t>(T) * H * W;
        for (std::size_t i = 0; i < plane; ++i) bias_acc += static_cast<double>(obase[i]);
        g.params.bias[oc] = static_cast<S>(bias_acc);

        for (int ic = 0; ic < p.in_ch; ++ic) {
            for (int kt = 0; kt < 3; ++kt) {
                for (int kh = 0; kh < 3; ++kh) {
                    const std::size_t kbase =
                        (((static_cast<std::size_t>(oc) * p.in_ch + ic) * 3 + kt) * 3 + kh) * 3;
                    double k_acc0 = 0.0, k_acc1 = 0.0, k_acc2 = 0.0;
                    for (int t = 0; t < T; ++t) {
                        for (int h = 0; h < H; ++h) {
                            const S* src = px.row(ic, t + kt, h + kh);
                            const S* dg = d_out.row(oc, t, h);
                            double a0 = 0.0, a1 = 0.0, a2 = 0.0;
                            for (int w = 0; w < W; ++w) {
                                const double d = static_cast<double>(dg[w]);
                                a0 += d * src[w];
                                a1 += d * src[w + 1];
                                a2 += d * src[w + 2];
                            }
                            k_acc0 += a0;
                            k_acc1 += a1;
                            k_acc2 += a2;
                        }
                    }
                    g.params.kernel[kbase] += static_cast<S>(k_acc0);
                    g.params.kernel[kbase + 1] += static_cast<S>(k_acc1);
                    g.params.kernel[kbase + 2] += static_cast<S>(k_acc2);

                    // dInput: correlation of d_out with the flipped kernel.
                    const S* krow = p.kernel.data() + kbase;
                    const S k0 = krow[0], k1 = krow[1], k2 = krow[2];
                    for (int t = 0; t < T; ++t) {
                        for (int h = 0; h < H; ++h) {
                            const S* dsrc = pd.row(oc, t + 2 - kt, h + 2 - kh);
                            S* dst = g.input.row(ic, t, h);
                            for (int w = 0; w < W; ++w) {
                                dst[w] += k2 * dsrc[w] + k1 * dsrc[w + 1] + k0 * dsrc[w + 2];
                            }
                        }
                    }
                }
            }
        }
    }
    return g;
}

// Routes each output gradient to the first maximum in scan order.
template <typename S>
Tensor4<S> maxpool3d_backward(const Tensor4<S>& x, int pt, int ph, int pw,
                              const Tensor4<S>& d_out) {
    Tensor4<S> dx(x.c, x.t, x.h, x.w);
    for (int c = 0; c < x.c; ++c) {
        for (int ot = 0; ot < d_out.t; ++ot) {
            const int t0 = ot * pt, t1 = std::min(t0 + pt, x.t);
            for (int oh = 0; oh < d_out.h; ++oh) {
                const int h0 = oh * ph, h1 = std::min(h0 + ph, x.h);
                for (int ow = 0; ow < d_out.w; ++ow) {
                    const int w0 = ow * pw, w1 = std::min(w0 + pw, x.w);
                    int bt = t0, bh = h0, bw = w0;
                    S best = x.at(c, t0, h0, w0);
                    for (int t = t0; t < t1; ++t)
                        for (int h = h0; h < h1; ++h)
                            for (int w = w0; w < w1; ++w)
                                if (x.at(c, t, h, w) > best) {
                                    best = x.at(c, t, h, w);
                                    bt = t;
                                    bh = h;
                                    bw = w;
                                }
                    dx.at(c, bt, bh, bw) += d_out.at(c, ot, oh, ow);
                }
            }
        }
    }
    return dx;
}

template <typename S>
struct GradBundle {
    WeightBundleT<S> g;

    static GradBundle zeros_like(const WeightBundleT<S>& wb) {
        GradBundle out;
        out.g.convs.reserve(wb.convs.size());
        for (const auto& cp : wb.convs) {
            ConvParams<S> z;
            z.in_ch = cp.in_ch;
            z.out_ch = cp.out_ch;
            z.kernel.assign(cp.kernel.size(), S(0));
            z.bias.assign(cp.bias.size(), S(0));
            out.g.convs.push_back(std::move(z));
        }
        out.g.head_w.assign(wb.head_w.size(), S(0));
        out.g.head_b.assign(wb.head_b.size(), S(0));
        return out;
    }

    void scale(S a) {
        for (auto& cp : g.convs) {
            for (auto& v : cp.kernel) v *= a;
            for (auto& v : cp.bias) v *= a;
        }
        for (auto& v : g.head_w) v *= a;
        for (auto& v : g.head_b) v *= a;
    }
};

// Forward pass with cached layer inputs, then full backpropagation.
// Accumulates parameter gradients into `acc` and returns the sample loss.
template <typename S>
S sample_loss_and_grad(const Tensor4<S>& input, int label, const EncoderConfig& cfg,
                       const WeightBundleT<S>& wb, GradBundle<S>& acc) {
    const std::size_t n_layers = cfg.layers.size();
    std::vector<Tensor4<S>> inputs(n_layers); // input of each layer
    Tensor4<S> x = input;
    std::size_t conv_idx = 0;
    for (std::size_t li = 0; li < n_layers; ++li) {
        inputs[li] = std::move(x);
        const auto& layer = cfg.layers[li];
        if (layer.kind == LayerKind::Conv3d) {
            x = conv3d_forward(inputs[li], wb.convs[conv_idx++], /*relu=*/true);
        } else {
            x = maxpool3d_forward(inputs[li], layer.pt, layer.ph, layer.pw);
        }
    }

    const std::vector<S>& feat = x.data;
    const std::vector<S> logits = head_logits(feat, cfg, wb);
    auto [loss, d_logits] = softmax_cross_entropy(logits, label);

    // Head gradients and gradient wrt the flattened feature.
    const std::size_t n = feat.size();
    std::vector<S> d_feat(n, S(0));
    for (int k = 0; k < cfg.num_classes; ++k) {
        const S dk = d_logits[k];
        const S* row = wb.head_w.data() + static_cast<std::size_t>(k) * n;
        S* grow = acc.g.head_w.data() + static_cast<std::size_t>(k) * n;
        for (std::size_t i = 0; i < n; ++i) {
            grow[i] += dk * feat[i];
            d_feat[i] += dk * row[i];
        }
        acc.g.head_b[k] += dk;
    }

    Tensor4<S> d = x; // adopt final shape
    d.data = std::move(d_feat);

    conv_idx = wb.convs.size();
    for (std::size_t li = n_layers; li-- > 0;) {
        const auto& layer = cfg.layers[li];
        if (layer.kind == LayerKind::Conv3d) {
            --conv_idx;
            // Rectifier mask: the activated output was produced from this
            // layer; re-run the cheap forward to recover it? Not needed:
            // out > 0 iff pre-activation > 0, and the activated output is
            // exactly the input cached by the NEXT layer (or the feature
            // map itself for the last layer).
            const Tensor4<S>& activated = (li + 1 < n_layers) ? inputs[li + 1] : x;
            for (std::size_t i = 0; i < d.data.size(); ++i)
                if (!(activated.data[i] > S(0))) d.data[i] = S(0);
            ConvGrads<S> g = conv3d_backward(inputs[li], wb.convs[conv_idx], d);
            auto& gacc = acc.g.convs[conv_idx];
            for (std::size_t i = 0; i < g.params.kernel.size(); ++i)
                gacc.kernel[i] += g.params.kernel[i];
            for (std::size_t i = 0; i < g.params.bias.size(); ++i) gacc.bias[i] += g.params.bias[i];
            d = std::move(g.input);
        } else {
            d = maxpool3d_backward(inputs[li], layer.pt, layer.ph, layer.pw, d);
        }
    }
    return loss;
}

// Mean loss and mean parameter gradient over a batch of samples.
template <typename S>
std::pair<S, GradBundle<S>> batch_loss_and_grad(const std::vector<const VideoClip*>& clips,
                                                const std::vector<int>& labels,
                                                const EncoderConfig& cfg,
                                                const WeightBundleT<S>& wb) {
    GradBundle<S> acc = GradBundle<S>::zeros_like(wb);
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        loss_sum += static_cast<double>(
            sample_loss_and_grad(clip_to_tensor<S>(*clips[i]), labels[i], cfg, wb, acc));
    }
    const S inv = S(1) / static_cast<S>(clips.size());
    acc.scale(inv);
    return {static_cast<S>(loss_sum / clips.size()), std::move(acc)};
}

struct PretrainHyper {
    double lr = 0.01;
    int epochs = 10;
    int batch = 8;
    std::uint64_t seed = 0;
};

template <typename S>
struct PretrainResultT {
    WeightBundleT<S> weights;
    std::vector<double> epoch_loss;
};
using PretrainResult = PretrainResultT<float>;

template <typename S>
void apply_sgd_step(WeightBundleT<S>& wb, const GradBundle<S>& grad, S lr) {
    for (std::size_t l = 0; l < wb.convs.size(); ++l) {
        auto& cp = wb.convs[l];
        const auto& gp = grad.g.convs[l];
        for (std::size_t i = 0; i < cp.kernel.size(); ++i) cp.kernel[i] -= lr * gp.kernel[i];
        for (std::size_t i = 0; i < cp.bias.size(); ++i) cp.bias[i] -= lr * gp.bias[i];
    }
    for (std::size_t i = 0; i < wb.head_w.size(); ++i) wb.head_w[i] -= lr * grad.g.head_w[i];
    for (std::size_t i = 0; i < wb.head_b.size(); ++i) wb.head_b[i] -= lr * grad.g.head_b[i];
}

template <typename S = float>
PretrainResultT<S> pretrain(const SyntheticActivityDataset& dataset, const EncoderConfig& cfg,
                            const PretrainHyper& hyper) {
    if (dataset.size() == 0) throw UsageError("pretrain: empty dataset");
    if (dataset.labels.size() != dataset.clips.size())
        throw UsageError("pretrain: label/clip count mismatch");
    for (const auto& clip : dataset.clips) check_preprocessed<S>(clip, cfg);
    for (int label : dataset.labels)
        if (label < 0 || label >= cfg.num_classes) throw UsageError("pretrain: label out of range");

    PretrainResultT<S> result;
    result.weights = init_weights<S>(cfg, hyper.seed);

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        Rng rng(mix_seed(hyper.seed, 0x45504f43ull, static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += hyper.batch) {
            const std::size_t end = std::min(order.size(), start + hyper.batch);
            std::vector<const VideoClip*> clips;
            std::vector<int> labels;
            for (std::size_t i = start; i < end; ++i) {
                clips.push_back(&dataset.clips[order[i]]);
                labels.push_back(dataset.labels[order[i]]);
            }
            auto [loss, grad] = batch_loss_and_grad(clips, labels, cfg, result.weights);
            if (!std::isfinite(static_cast<double>(loss)))
                throw TrainingError("pretrain diverged (non-finite loss) at epoch " +
                                        std::to_string(epoch),
                                    epoch);
            apply_sgd_step(result.weights, grad, static_cast<S>(hyper.lr));
            epoch_loss += static_cast<double>(loss) * static_cast<double>(clips.size());
            seen += clips.size();
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(seen));
    }
    return result;
}

// Fraction of dataset clips whose argmax class matches the label.
template <typename S>
double dataset_accuracy(const SyntheticActivityDataset& dataset, const EncoderConfig& cfg,
                        const WeightBundleT<S>& wb) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        Tensor4<S> out = forward_stack(clip_to_tensor<S>(dataset.clips[i]), cfg, wb);
        const std::vector<S> logits = head_logits(out.data, cfg, wb);
        int best = 0;
        for (int k = 1; k < cfg.num_classes; ++k)
            if (logits[k] > logits[best]) best = k;
        if (best == dataset.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

} // namespace plab
