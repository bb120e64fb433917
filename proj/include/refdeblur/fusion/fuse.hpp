#pragma once

#include <string>

#include "refdeblur/features/conv.hpp"

namespace refdeblur {

/// conv1: [F_blur ; F_trans] (2C) -> C, 3x3 by default.
/// conv2: confidence (1) -> C, 1x1 by default.
/// Bundle names: fusion.conv1.{w,b}, fusion.conv2.{w,b}.
template <std::floating_point T>
struct FusionWeights {
    ConvLayer<T> conv1;
    ConvLayer<T> conv2;

    [[nodiscard]] std::size_t channels() const noexcept { return conv1.out_channels; }

    static FusionWeights zeros(std::size_t C, std::size_t k1 = 3, std::size_t k2 = 1) {
        return {ConvLayer<T>::zeros(C, 2 * C, k1, k1), ConvLayer<T>::zeros(C, 1, k2, k2)};
    }

    static FusionWeights from_bundle(const WeightBundle& w) {
        FusionWeights f;
        f.conv1 = load_conv<T>(w, "fusion.conv1");
        const std::size_t C = f.conv1.out_channels;
        if (f.conv1.in_channels != 2 * C) {
            throw WeightError("'fusion.conv1.w' must map 2C -> C, got " + std::to_string(f.conv1.in_channels) +
                              " -> " + std::to_string(C));
        }
        f.conv2 = load_conv<T>(w, "fusion.conv2", {C, 1, 0, 0});
        return f;
    }

    void store(WeightBundle& w) const {
        conv1.store(w, "fusion.conv1");
        conv2.store(w, "fusion.conv2");
    }

    void validate(std::size_t C) const {
        if (conv1.out_channels != C || conv1.in_channels != 2 * C || conv2.out_channels != C ||
            conv2.in_channels != 1) {
            throw ContractViolation("fusion weights do not match C=" + std::to_string(C));
        }
    }
};

namespace detail {

template <std::floating_point T>
void check_fuse_inputs(const Tensor<T>& blur, const Tensor<T>& trans, const Tensor<T>& conf,
                       const FusionWeights<T>& w) {
    if (!blur.same_shape(trans)) {
        throw ContractViolation("F_blur " + blur.shape_string() + " vs F_trans " + trans.shape_string());
    }
    if (!conf.same_grid(blur.height(), blur.width()) || conf.channels() != 1) {
        throw ContractViolation("confidence grid " + conf.shape_string() + " vs features " + blur.shape_string());
    }
    w.validate(blur.channels());
}

}  // namespace detail

/// conv1([F_blur ; F_trans]) * conv2(S) + F_blur, elementwise product.
template <std::floating_point T>
Tensor<T> fuse(const Tensor<T>& blur, const Tensor<T>& trans, const Tensor<T>& conf, const FusionWeights<T>& w) {
    detail::check_fuse_inputs(blur, trans, conf, w);
    Tensor<T> residual = conv2d(concat_channels(blur, trans), w.conv1);
    const Tensor<T> gate = conv2d(conf, w.conv2);
    auto r = residual.values();
    auto g = gate.values();
    auto b = blur.values();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = r[i] * g[i] + b[i];
    return residual;
}

template <std::floating_point T>
struct FuseGrads {
    Tensor<T> blur;
    Tensor<T> trans;
    Tensor<T> conf;
    ConvGrads<T> conv1;  // .input unused (split into blur / trans)
    ConvGrads<T> conv2;  // .input unused (folded into conf)
};

/// Exact reverse-mode gradients of `fuse` for upstream dL/d(output).
template <std::floating_point T>
FuseGrads<T> fuse_backward(const Tensor<T>& upstream, const Tensor<T>& blur, const Tensor<T>& trans,
                           const Tensor<T>& conf, const FusionWeights<T>& w) {
    detail::check_fuse_inputs(blur, trans, conf, w);
    if (!upstream.same_shape(blur)) {
        throw ContractViolation("upstream gradient " + upstream.shape_string() + " vs output " + blur.shape_string());
    }
    const Tensor<T> stacked = concat_channels(blur, trans);
    const Tensor<T> residual = conv2d(stacked, w.conv1);
    const Tensor<T> gate = conv2d(conf, w.conv2);

    Tensor<T> d_residual(upstream.height(), upstream.width(), upstream.channels());
    Tensor<T> d_gate(upstream.height(), upstream.width(), upstream.channels());
    for (std::size_t i = 0; i < upstream.size(); ++i) {
        d_residual.values()[i] = upstream.values()[i] * gate.values()[i];
        d_gate.values()[i] = upstream.values()[i] * residual.values()[i];
    }

    FuseGrads<T> g;
    g.conv1 = conv2d_backward(stacked, w.conv1, d_residual);
    g.conv2 = conv2d_backward(conf, w.conv2, d_gate);

    const std::size_t C = blur.channels();
    g.blur = upstream;
    g.trans = Tensor<T>(blur.height(), blur.width(), C);
    for (std::size_t c = 0; c < C; ++c) {
        auto src_b = g.conv1.input.plane(c);
        auto src_t = g.conv1.input.plane(C + c);
        auto dst_b = g.blur.plane(c);
        auto dst_t = g.trans.plane(c);
        for (std::size_t i = 0; i < dst_b.size(); ++i) {
            dst_b[i] += src_b[i];
            dst_t[i] = src_t[i];
        }
    }
    g.conf = std::move(g.conv2.input);
    g.conv1.input = {};
    g.conv2.input = {};
    return g;
}

}  // namespace refdeblur
