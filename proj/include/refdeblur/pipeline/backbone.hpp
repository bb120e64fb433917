#pragma once

#include <optional>
#include <utility>

#include "refdeblur/core/pyramid.hpp"
#include "refdeblur/features/conv.hpp"

namespace refdeblur {

/// Toy multi-scale backbone shared by every scale:
///   F_blur = conv2(relu(conv1(I_blur))) + carry(upsample(F_coarser))
///   I_inter = clamp(I_blur + head(F), 0, 1)
/// Bundle names: backbone.conv1, backbone.conv2 (3x3), backbone.carry (1x1,
/// no bias), backbone.head (1x1, C -> image channels).
template <std::floating_point T>
struct Backbone {
    ConvLayer<T> conv1, conv2, carry, head;

    [[nodiscard]] std::size_t channels() const noexcept { return conv1.out_channels; }
    [[nodiscard]] std::size_t image_channels() const noexcept { return conv1.in_channels; }

    static Backbone from_bundle(const WeightBundle& w) {
        Backbone b;
        b.conv1 = load_conv<T>(w, "backbone.conv1", {0, 0, 3, 3});
        const std::size_t C = b.conv1.out_channels, I = b.conv1.in_channels;
        if (I != 1 && I != 3) throw WeightError("'backbone.conv1.w' must take 1 or 3 image channels");
        b.conv2 = load_conv<T>(w, "backbone.conv2", {C, C, 3, 3});
        b.carry = load_conv<T>(w, "backbone.carry", {C, C, 1, 1}, /*allow_bias=*/false);
        b.head = load_conv<T>(w, "backbone.head", {I, C, 1, 1});
        return b;
    }

    void store(WeightBundle& w) const {
        conv1.store(w, "backbone.conv1");
        conv2.store(w, "backbone.conv2");
        carry.store(w, "backbone.carry");
        head.store(w, "backbone.head");
    }

    /// F_blur for one scale; `carry` is the coarser scale's fused features.
    [[nodiscard]] Tensor<T> features(const Tensor<T>& blur, const Tensor<T>* carry_in) const {
        if (blur.channels() != image_channels()) {
            throw WeightError("backbone expects " + std::to_string(image_channels()) + "-channel images, got " +
                              blur.shape_string());
        }
        Tensor<T> f = conv2d(relu(conv2d(blur, conv1)), conv2);
        if (carry_in != nullptr) {
            if (carry_in->channels() != channels()) {
                throw WeightError("carry has " + std::to_string(carry_in->channels()) + " channels, backbone uses " +
                                  std::to_string(channels()));
            }
            add_inplace(f, conv2d(upsample_nearest_2x(*carry_in, blur.height(), blur.width()), carry));
        }
        return f;
    }

    /// Residual decode: clamp(I_blur + head(F), 0, 1).
    [[nodiscard]] Tensor<T> decode(const Tensor<T>& blur, const Tensor<T>& f) const {
        Tensor<T> out = conv2d(f, head);
        add_inplace(out, blur);
        for (T& v : out.values()) v = std::clamp(v, T{0}, T{1});
        return out;
    }
};

/// One backbone scale: (F_blur_k, I_inter_k).
inline std::pair<FeatureMap, ImageBuf> toy_backbone_scale(const ImageBuf& blur, const FeatureMap* carry,
                                                          const WeightBundle& w) {
    const auto b = Backbone<float>::from_bundle(w);
    FeatureMap f = b.features(blur, carry);
    ImageBuf inter = ImageBuf::from(b.decode(blur, f));
    return {std::move(f), std::move(inter)};
}

/// Reference-free coarse-to-fine run; returns I_inter per level, finest first.
inline std::vector<ImageBuf> run_backbone(const ImageBuf& blur, const WeightBundle& w, std::size_t K) {
    const auto b = Backbone<float>::from_bundle(w);
    const ImagePyramid pyr = build_pyramid(blur, K);
    std::vector<ImageBuf> out(K);
    std::optional<FeatureMap> carry;
    for (std::size_t k = K; k-- > 0;) {
        FeatureMap f = b.features(pyr.levels[k], carry ? &*carry : nullptr);
        out[k] = ImageBuf::from(b.decode(pyr.levels[k], f));
        carry = std::move(f);
    }
    return out;
}

}  // namespace refdeblur
