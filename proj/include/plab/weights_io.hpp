#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "plab/encoder.hpp"
#include "plab/error.hpp"

namespace plab {

// Binary weight file, little-endian:
//   magic "OSLW" | u32 version=1 | u32 tensor count
//   per tensor: u16 name length | name bytes | u8 rank | u32 dims[rank] | f32 data
// Tensors appear as conv<i>.weight / conv<i>.bias in layer order, then
// head.weight / head.bias.

namespace detail {

inline void write_u16(std::ostream& out, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint16_t read_u16(std::istream& in) {
    unsigned char b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    if (!in) throw FormatError("weight file: truncated");
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError("weight file: truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

struct NamedTensor {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<float> data;
};

inline void write_tensor(std::ostream& out, const NamedTensor& t) {
    write_u16(out, static_cast<std::uint16_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    out.put(static_cast<char>(t.dims.size()));
    std::size_t count = 1;
    for (std::uint32_t d : t.dims) {
        write_u32(out, d);
        count *= d;
    }
    if (count != t.data.size()) throw UsageError("write_tensor: dim/data mismatch");
    // Host is little-endian on every supported target; raw f32 write.
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
}

inline NamedTensor read_tensor(std::istream& in) {
    NamedTensor t;
    const std::uint16_t name_len = read_u16(in);
    t.name.resize(name_len);
    in.read(t.name.data(), name_len);
    if (!in) throw FormatError("weight file: truncated tensor name");
    const int rank = in.get();
    if (rank < 0) throw FormatError("weight file: truncated rank");
    std::size_t count = 1;
    for (int i = 0; i < rank; ++i) {
        const std::uint32_t d = read_u32(in);
        t.dims.push_back(d);
        count *= d;
    }
    t.data.resize(count);
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) throw FormatError("weight file: truncated tensor data");
    for (float v : t.data)
        if (!std::isfinite(v)) throw FormatError("weight file: non-finite value in " + t.name);
    return t;
}

inline std::vector<NamedTensor> bundle_to_tensors(const WeightBundle& wb) {
    std::vector<NamedTensor> out;
    for (std::size_t i = 0; i < wb.convs.size(); ++i) {
        const auto& cp = wb.convs[i];
        const std::string prefix = "conv" + std::to_string(i + 1);
        out.push_back({prefix + ".weight",
                       {static_cast<std::uint32_t>(cp.out_ch), static_cast<std::uint32_t>(cp.in_ch),
                        3u, 3u, 3u},
                       cp.kernel});
        out.push_back({prefix + ".bias", {static_cast<std::uint32_t>(cp.out_ch)}, cp.bias});
    }
    return out;
}

} // namespace detail

inline void save_weights(const WeightBundle& wb, const EncoderConfig& cfg,
                         const std::string& path) {
    validate_weights(cfg, wb);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    out.write("OSLW", 4);
    detail::write_u32(out, 1u);

    std::vector<detail::NamedTensor> tensors = detail::bundle_to_tensors(wb);
    tensors.push_back({"head.weight",
                       {static_cast<std::uint32_t>(cfg.num_classes),
                        static_cast<std::uint32_t>(feature_dim(cfg))},
                       wb.head_w});
    tensors.push_back({"head.bias", {static_cast<std::uint32_t>(cfg.num_classes)}, wb.head_b});

    detail::write_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) detail::write_tensor(out, t);
    if (!out) throw FormatError("write failed: " + path);
}

inline WeightBundle load_weights(const EncoderConfig& cfg, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open weight file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "OSLW", 4) != 0)
        throw FormatError("weight file: bad magic in " + path);
    const std::uint32_t version = detail::read_u32(in);
    if (version != 1) throw FormatError("weight file: unsupported version " + std::to_string(version));
    const std::uint32_t count = detail::read_u32(in);

    std::vector<detail::NamedTensor> tensors;
    for (std::uint32_t i = 0; i < count; ++i) tensors.push_back(detail::read_tensor(in));

    WeightBundle wb;
    std::size_t ti = 0;
    auto next = [&](const std::string& expected) -> detail::NamedTensor& {
        if (ti >= tensors.size())
            throw FormatError("weight file: missing tensor " + expected);
        if (tensors[ti].name != expected)
            throw FormatError("weight file: expected tensor " + expected + ", found " +
                              tensors[ti].name);
        return tensors[ti++];
    };

    int conv_count = 0;
    for (const auto& layer : cfg.layers)
        if (layer.kind == LayerKind::Conv3d) ++conv_count;
    int in_ch = 3;
    int conv_idx = 0;
    for (const auto& layer : cfg.layers) {
        if (layer.kind != LayerKind::Conv3d) continue;
        const std::string prefix = "conv" + std::to_string(conv_idx + 1);
        auto& wt = next(prefix + ".weight");
        auto& bt = next(prefix + ".bias");
        ConvParams<float> cp;
        cp.in_ch = in_ch;
        cp.out_ch = layer.out_channels;
        const std::vector<std::uint32_t> want = {static_cast<std::uint32_t>(cp.out_ch),
                                                 static_cast<std::uint32_t>(cp.in_ch), 3u, 3u, 3u};
        if (wt.dims != want)
            throw FormatError("weight file: shape mismatch for " + wt.name);
        if (bt.dims != std::vector<std::uint32_t>{static_cast<std::uint32_t>(cp.out_ch)})
            throw FormatError("weight file: shape mismatch for " + bt.name);
        cp.kernel = std::move(wt.data);
        cp.bias = std::move(bt.data);
        wb.convs.push_back(std::move(cp));
        in_ch = layer.out_channels;
        ++conv_idx;
    }
    auto& hw = next("head.weight");
    auto& hb = next("head.bias");
    const std::vector<std::uint32_t> want_hw = {static_cast<std::uint32_t>(cfg.num_classes),
                                                static_cast<std::uint32_t>(feature_dim(cfg))};
    if (hw.dims != want_hw) throw FormatError("weight file: shape mismatch for head.weight");
    if (hb.dims != std::vector<std::uint32_t>{static_cast<std::uint32_t>(cfg.num_classes)})
        throw FormatError("weight file: shape mismatch for head.bias");
    wb.head_w = std::move(hw.data);
    wb.head_b = std::move(hb.data);
    if (ti != tensors.size()) throw FormatError("weight file: unexpected extra tensors");
    validate_weights(cfg, wb);
    return wb;
}

} // namespace plab
