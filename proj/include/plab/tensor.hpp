#pragma once

#include <cstddef>
#include <vector>

#include "plab/error.hpp"

namespace plab {

// Channel-major volume (C, T, H, W) with W contiguous; the layout the
// convolution inner loops rely on.
template <typename S>
struct Tensor4 {
    int c = 0, t = 0, h = 0, w = 0;
    std::vector<S> data;

    Tensor4() = default;
    Tensor4(int c_, int t_, int h_, int w_)
        : c(c_), t(t_), h(h_), w(w_),
          data(static_cast<std::size_t>(c_) * t_ * h_ * w_, S(0)) {}

    std::size_t size() const { return data.size(); }

    std::size_t index(int ci, int ti, int hi, int wi) const {
        return ((static_cast<std::size_t>(ci) * t + ti) * h + hi) * w + wi;
    }

    S& at(int ci, int ti, int hi, int wi) { return data[index(ci, ti, hi, wi)]; }
    S at(int ci, int ti, int hi, int wi) const { return data[index(ci, ti, hi, wi)]; }

    S* row(int ci, int ti, int hi) { return data.data() + index(ci, ti, hi, 0); }
    const S* row(int ci, int ti, int hi) const { return data.data() + index(ci, ti, hi, 0); }

    bool same_shape(const Tensor4& o) const {
        return c == o.c && t == o.t && h == o.h && w == o.w;
    }

    template <typename T>
    Tensor4<T> cast() const {
        Tensor4<T> out(c, t, h, w);
        for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<T>(data[i]);
        return out;
    }
};

struct Shape4 {
    int c = 0, t = 0, h = 0, w = 0;
    std::size_t product() const {
        return static_cast<std::size_t>(c) * t * h * w;
    }
    bool operator==(const Shape4&) const = default;
};

} // namespace plab
