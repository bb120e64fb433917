#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "refdeblur/core/tensor.hpp"
#include "refdeblur/features/weights.hpp"

namespace refdeblur {

enum class PadMode { Replicate, Zero };

/// 2-D convolution layer (cross-correlation, OIHW weights, "same" output).
template <std::floating_point T>
struct ConvLayer {
    std::size_t out_channels = 0;
    std::size_t in_channels = 0;
    std::size_t kernel_h = 1;
    std::size_t kernel_w = 1;
    std::size_t stride = 1;
    PadMode pad = PadMode::Replicate;
    std::vector<T> weight;  // out x in x kh x kw
    std::vector<T> bias;    // out, or empty for no bias

    static ConvLayer zeros(std::size_t out, std::size_t in, std::size_t kh, std::size_t kw, bool with_bias = true) {
        ConvLayer l;
        l.out_channels = out;
        l.in_channels = in;
        l.kernel_h = kh;
        l.kernel_w = kw;
        l.weight.assign(out * in * kh * kw, T{0});
        if (with_bias) l.bias.assign(out, T{0});
        return l;
    }

    [[nodiscard]] T& w(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) {
        return weight[((o * in_channels + i) * kernel_h + ky) * kernel_w + kx];
    }
    [[nodiscard]] T w(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const {
        return weight[((o * in_channels + i) * kernel_h + ky) * kernel_w + kx];
    }
    [[nodiscard]] T b(std::size_t o) const { return bias.empty() ? T{0} : bias[o]; }

    [[nodiscard]] bool all_zero() const {
        auto z = [](T v) { return v == T{0}; };
        return std::ranges::all_of(weight, z) && std::ranges::all_of(bias, z);
    }

    template <std::floating_point U>
    [[nodiscard]] ConvLayer<U> cast() const {
        ConvLayer<U> l;
        l.out_channels = out_channels;
        l.in_channels = in_channels;
        l.kernel_h = kernel_h;
        l.kernel_w = kernel_w;
        l.stride = stride;
        l.pad = pad;
        l.weight.assign(weight.begin(), weight.end());
        l.bias.assign(bias.begin(), bias.end());
        return l;
    }

    /// Serializes into `bundle` as "<prefix>.w" (and "<prefix>.b" when present).
    void store(WeightBundle& bundle, const std::string& prefix) const {
        WeightTensor wt{{static_cast<std::uint32_t>(out_channels), static_cast<std::uint32_t>(in_channels),
                         static_cast<std::uint32_t>(kernel_h), static_cast<std::uint32_t>(kernel_w)},
                        std::vector<float>(weight.begin(), weight.end())};
        bundle.insert_or_assign(prefix + ".w", std::move(wt));
        if (!bias.empty()) {
            bundle.insert_or_assign(prefix + ".b", WeightTensor{{static_cast<std::uint32_t>(out_channels)},
                                                                std::vector<float>(bias.begin(), bias.end())});
        }
    }
};

/// Expected shape for `load_conv`; zero means "any".
struct ConvShape {
    std::size_t out = 0, in = 0, kh = 0, kw = 0;
};

/// Reads "<prefix>.w" (required, rank 4 OIHW) and "<prefix>.b" (optional).
template <std::floating_point T>
ConvLayer<T> load_conv(const WeightBundle& bundle, const std::string& prefix, ConvShape expect = {},
                       bool allow_bias = true) {
    const WeightTensor& wt = bundle.at(prefix + ".w");
    if (wt.shape.size() != 4) throw WeightError("'" + prefix + ".w' must be rank 4 (out, in, kh, kw)");
    ConvLayer<T> l;
    l.out_channels = wt.shape[0];
    l.in_channels = wt.shape[1];
    l.kernel_h = wt.shape[2];
    l.kernel_w = wt.shape[3];
    auto mismatch = [&](const char* what, std::size_t got, std::size_t want) {
        return WeightError("'" + prefix + ".w' " + what + " is " + std::to_string(got) + ", expected " +
                           std::to_string(want));
    };
    if (expect.out && l.out_channels != expect.out) throw mismatch("out channels", l.out_channels, expect.out);
    if (expect.in && l.in_channels != expect.in) throw mismatch("in channels", l.in_channels, expect.in);
    if (expect.kh && l.kernel_h != expect.kh) throw mismatch("kernel height", l.kernel_h, expect.kh);
    if (expect.kw && l.kernel_w != expect.kw) throw mismatch("kernel width", l.kernel_w, expect.kw);
    if (l.kernel_h % 2 == 0 || l.kernel_w % 2 == 0) throw WeightError("'" + prefix + ".w' kernel must be odd-sized");
    if (l.out_channels == 0 || l.in_channels == 0) throw WeightError("'" + prefix + ".w' has a zero dimension");
    l.weight.assign(wt.values.begin(), wt.values.end());
    if (const WeightTensor* bt = bundle.find(prefix + ".b")) {
        if (!allow_bias) throw WeightError("'" + prefix + "' must not have a bias");
        if (bt->shape.size() != 1 || bt->shape[0] != l.out_channels) {
            throw WeightError("'" + prefix + ".b' must have shape [" + std::to_string(l.out_channels) + "]");
        }
        l.bias.assign(bt->values.begin(), bt->values.end());
    }
    return l;
}

namespace detail {

/// Copies one channel plane into a (h + 2py) x (w + 2px) buffer with the requested padding.
template <std::floating_point T>
std::vector<T> padded_plane(const Tensor<T>& in, std::size_t c, std::size_t py, std::size_t px, PadMode pad) {
    const std::size_t pw = in.width() + 2 * px;
    const std::size_t ph = in.height() + 2 * py;
    std::vector<T> buf(ph * pw, T{0});
    for (std::size_t y = 0; y < ph; ++y) {
        const auto sy = static_cast<std::ptrdiff_t>(y) - static_cast<std::ptrdiff_t>(py);
        for (std::size_t x = 0; x < pw; ++x) {
            const auto sx = static_cast<std::ptrdiff_t>(x) - static_cast<std::ptrdiff_t>(px);
            const bool inside = sx >= 0 && sy >= 0 && sx < static_cast<std::ptrdiff_t>(in.width()) &&
                                sy < static_cast<std::ptrdiff_t>(in.height());
            if (inside || pad == PadMode::Replicate) buf[y * pw + x] = in.clamped(sx, sy, c);
        }
    }
    return buf;
}

template <std::floating_point T>
void check_conv_input(const Tensor<T>& in, const ConvLayer<T>& layer) {
    if (in.channels() != layer.in_channels) {
        throw ContractViolation("conv expects " + std::to_string(layer.in_channels) + " input channels, got " +
                                in.shape_string());
    }
    if (in.empty()) throw DegenerateSizeError("conv on an empty grid");
    if (layer.stride == 0) throw ContractViolation("conv stride must be >= 1");
}

}  // namespace detail

/// Output is ceil(H / stride) x ceil(W / stride) x out_channels.
template <std::floating_point T>
Tensor<T> conv2d(const Tensor<T>& in, const ConvLayer<T>& layer) {
    detail::check_conv_input(in, layer);
    const std::size_t py = layer.kernel_h / 2, px = layer.kernel_w / 2, s = layer.stride;
    const std::size_t oh = (in.height() + s - 1) / s, ow = (in.width() + s - 1) / s;
    const std::size_t pw = in.width() + 2 * px;
    Tensor<T> out(oh, ow, layer.out_channels);
    for (std::size_t o = 0; o < layer.out_channels; ++o) {
        auto plane = out.plane(o);
        std::fill(plane.begin(), plane.end(), layer.b(o));
    }
    for (std::size_t i = 0; i < layer.in_channels; ++i) {
        const auto src = detail::padded_plane(in, i, py, px, layer.pad);
        for (std::size_t o = 0; o < layer.out_channels; ++o) {
            auto dst = out.plane(o);
            for (std::size_t ky = 0; ky < layer.kernel_h; ++ky)
                for (std::size_t kx = 0; kx < layer.kernel_w; ++kx) {
                    const T wv = layer.w(o, i, ky, kx);
                    if (wv == T{0}) continue;
                    for (std::size_t y = 0; y < oh; ++y) {
                        const T* row = src.data() + (y * s + ky) * pw + kx;
                        T* drow = dst.data() + y * ow;
                        for (std::size_t x = 0; x < ow; ++x) drow[x] += wv * row[x * s];
                    }
                }
        }
    }
    return out;
}

template <std::floating_point T>
struct ConvGrads {
    Tensor<T> input;
    std::vector<T> weight;
    std::vector<T> bias;
};

/// Reverse-mode gradients of conv2d (stride 1) given dL/d(output).
template <std::floating_point T>
ConvGrads<T> conv2d_backward(const Tensor<T>& in, const ConvLayer<T>& layer, const Tensor<T>& grad_out) {
    detail::check_conv_input(in, layer);
    if (layer.stride != 1) throw ContractViolation("conv2d_backward supports stride 1 only");
    if (!grad_out.same_grid(in.height(), in.width()) || grad_out.channels() != layer.out_channels) {
        throw ContractViolation("conv gradient shape " + grad_out.shape_string() + " does not match output");
    }
    const std::size_t h = in.height(), w = in.width();
    const std::size_t py = layer.kernel_h / 2, px = layer.kernel_w / 2;
    const std::size_t pw = w + 2 * px, ph = h + 2 * py;

    ConvGrads<T> g{Tensor<T>(h, w, layer.in_channels), std::vector<T>(layer.weight.size(), T{0}),
                   std::vector<T>(layer.bias.size(), T{0})};
    for (std::size_t o = 0; o < layer.bias.size(); ++o) {
        T acc{0};
        for (T v : grad_out.plane(o)) acc += v;
        g.bias[o] = acc;
    }
    for (std::size_t i = 0; i < layer.in_channels; ++i) {
        const auto src = detail::padded_plane(in, i, py, px, layer.pad);
        std::vector<T> gpad(ph * pw, T{0});
        for (std::size_t o = 0; o < layer.out_channels; ++o) {
            const auto go = grad_out.plane(o);
            for (std::size_t ky = 0; ky < layer.kernel_h; ++ky)
                for (std::size_t kx = 0; kx < layer.kernel_w; ++kx) {
                    const T wv = layer.w(o, i, ky, kx);
                    T acc{0};
                    for (std::size_t y = 0; y < h; ++y) {
                        const T* row = src.data() + (y + ky) * pw + kx;
                        T* grow = gpad.data() + (y + ky) * pw + kx;
                        const T* gorow = go.data() + y * w;
                        for (std::size_t x = 0; x < w; ++x) {
                            acc += gorow[x] * row[x];
                            grow[x] += wv * gorow[x];
                        }
                    }
                    g.weight[((o * layer.in_channels + i) * layer.kernel_h + ky) * layer.kernel_w + kx] = acc;
                }
        }
        // Fold the padded gradient back onto the source pixels it was read from.
        for (std::size_t y = 0; y < ph; ++y) {
            const auto sy = static_cast<std::ptrdiff_t>(y) - static_cast<std::ptrdiff_t>(py);
            for (std::size_t x = 0; x < pw; ++x) {
                const auto sx = static_cast<std::ptrdiff_t>(x) - static_cast<std::ptrdiff_t>(px);
                const bool inside = sx >= 0 && sy >= 0 && sx < static_cast<std::ptrdiff_t>(w) &&
                                    sy < static_cast<std::ptrdiff_t>(h);
                if (!inside && layer.pad == PadMode::Zero) continue;
                const auto cx = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(sx, 0, static_cast<std::ptrdiff_t>(w) - 1));
                const auto cy = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(sy, 0, static_cast<std::ptrdiff_t>(h) - 1));
                g.input(cx, cy, i) += gpad[y * pw + x];
            }
        }
    }
    return g;
}

template <std::floating_point T>
Tensor<T> relu(Tensor<T> t) {
    for (T& v : t.values()) v = std::max(v, T{0});
    return t;
}

template <class T>
Tensor<T>& add_inplace(Tensor<T>& a, const Tensor<T>& b) {
    if (!a.same_shape(b)) throw ContractViolation("add of " + a.shape_string() + " and " + b.shape_string());
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) av[i] += bv[i];
    return a;
}

/// Stacks channels of `a` then `b` on a shared grid.
template <class T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    if (!a.same_grid(b.height(), b.width())) {
        throw ContractViolation("concat of " + a.shape_string() + " and " + b.shape_string());
    }
    std::vector<T> v;
    v.reserve(a.size() + b.size());
    v.insert(v.end(), a.values().begin(), a.values().end());
    v.insert(v.end(), b.values().begin(), b.values().end());
    return Tensor<T>(a.height(), a.width(), a.channels() + b.channels(), std::move(v));
}

}  // namespace refdeblur
