// Independent brute-force oracles used to pin expected values. Everything
// here is deliberately written from the definitions, without reusing the
// library's loop structures, so a bug cannot cancel out of both sides.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "plab/clip.hpp"
#include "plab/encoder.hpp"
#include "plab/sim.hpp"
#include "plab/tensor.hpp"

namespace oracle {

// Plain 8-nested-loop cross-correlation with stride 1 and zero padding 1.
template <typename S>
plab::Tensor4<S> conv3d(const plab::Tensor4<S>& x, const plab::ConvParams<S>& p, bool relu) {
    plab::Tensor4<S> out(p.out_ch, x.t, x.h, x.w);
    for (int oc = 0; oc < p.out_ch; ++oc) {
        for (int t = 0; t < x.t; ++t) {
            for (int h = 0; h < x.h; ++h) {
                for (int w = 0; w < x.w; ++w) {
                    double acc = static_cast<double>(p.bias[oc]);
                    for (int ic = 0; ic < p.in_ch; ++ic) {
                        for (int kt = 0; kt < 3; ++kt) {
                            for (int kh = 0; kh < 3; ++kh) {
                                for (int kw = 0; kw < 3; ++kw) {
                                    const int ti = t + kt - 1;
                                    const int hi = h + kh - 1;
                                    const int wi = w + kw - 1;
                                    if (ti < 0 || ti >= x.t || hi < 0 || hi >= x.h || wi < 0 ||
                                        wi >= x.w)
                                        continue;
                                    acc += static_cast<double>(p.kernel_at(oc, ic, kt, kh, kw)) *
                                           static_cast<double>(x.at(ic, ti, hi, wi));
                                }
                            }
                        }
                    }
                    if (relu && acc < 0.0) acc = 0.0;
                    out.at(oc, t, h, w) = static_cast<S>(acc);
                }
            }
        }
    }
    return out;
}

// Window-scan max pooling with ceil-mode edges.
template <typename S>
plab::Tensor4<S> maxpool3d(const plab::Tensor4<S>& x, int pt, int ph, int pw) {
    const auto out_dim = [](int n, int k) { return (n + k - 1) / k; };
    plab::Tensor4<S> out(x.c, out_dim(x.t, pt), out_dim(x.h, ph), out_dim(x.w, pw));
    for (int c = 0; c < x.c; ++c)
        for (int ot = 0; ot < out.t; ++ot)
            for (int oh = 0; oh < out.h; ++oh)
                for (int ow = 0; ow < out.w; ++ow) {
                    bool first = true;
                    S best = S(0);
                    for (int t = ot * pt; t < std::min((ot + 1) * pt, x.t); ++t)
                        for (int h = oh * ph; h < std::min((oh + 1) * ph, x.h); ++h)
                            for (int w = ow * pw; w < std::min((ow + 1) * pw, x.w); ++w) {
                                if (first || x.at(c, t, h, w) > best) best = x.at(c, t, h, w);
                                first = false;
                            }
                    out.at(c, ot, oh, ow) = best;
                }
    return out;
}

// Layer-by-layer shape propagation, independent of plab::output_shape.
struct Shape {
    int c, t, h, w;
};
inline Shape propagate_shape(const plab::EncoderConfig& cfg) {
    Shape s{3, cfg.input_frames, cfg.input_h, cfg.input_w};
    for (const auto& layer : cfg.layers) {
        if (layer.kind == plab::LayerKind::Conv3d) {
            s.c = layer.out_channels; // stride-1 pad-1 convs keep T,H,W
        } else {
            s.t = static_cast<int>(std::ceil(static_cast<double>(s.t) / layer.pt));
            s.h = static_cast<int>(std::ceil(static_cast<double>(s.h) / layer.ph));
            s.w = static_cast<int>(std::ceil(static_cast<double>(s.w) / layer.pw));
        }
    }
    return s;
}

// Pixel-level HOG recomputation (same published convention: 9 unsigned bins
// with centers at i*20 degrees, 8x8 cells, 2x2 blocks, L2-hys).
std::vector<double> hog(const plab::Frame& frame);

// Textbook covariance/deviation Pearson formula.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) mx += x[i];
    for (std::size_t i = 0; i < n; ++i) my += y[i];
    mx /= n;
    my /= n;
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (x[i] - mx) * (y[i] - my);
        vx += (x[i] - mx) * (x[i] - mx);
        vy += (y[i] - my) * (y[i] - my);
    }
    return cov / (std::sqrt(vx) * std::sqrt(vy));
}

// Per-link accumulation forward kinematics with explicit rotation matrices.
inline std::vector<plab::Vec2> fk(const plab::ArmConfig& arm, const std::vector<double>& joints) {
    std::vector<plab::Vec2> pts{arm.base};
    double c = 1.0, s = 0.0; // running rotation matrix [c -s; s c]
    for (std::size_t i = 0; i < joints.size(); ++i) {
        const double cj = std::cos(joints[i]), sj = std::sin(joints[i]);
        const double c2 = c * cj - s * sj;
        const double s2 = s * cj + c * sj;
        c = c2;
        s = s2;
        pts.push_back({pts.back().x + arm.link_lengths[i] * c,
                       pts.back().y + arm.link_lengths[i] * s});
    }
    return pts;
}

// Central finite differences of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x, double eps) {
    return (f(x + eps) - f(x - eps)) / (2.0 * eps);
}

inline plab::Tensor4<double> random_tensor(int c, int t, int h, int w, plab::Rng& rng, double lo,
                                           double hi) {
    plab::Tensor4<double> x(c, t, h, w);
    for (auto& v : x.data) v = rng.uniform(lo, hi);
    return x;
}

} // namespace oracle
