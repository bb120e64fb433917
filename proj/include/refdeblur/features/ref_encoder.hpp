#pragma once

#include <array>
#include <string>

#include "refdeblur/features/conv.hpp"

namespace refdeblur {

/// Shallow reference encoder: three 3x3 convs then two residual blocks
/// (conv3x3 -> ReLU -> conv3x3, plus identity skip). ReLU follows conv1 and conv2.
///
/// Bundle names: ref.conv{1,2,3}.{w,b}, ref.res{1,2}.conv{1,2}.{w,b}. Biases optional.
template <std::floating_point T>
struct RefEncoder {
    static constexpr std::size_t kResBlocks = 2;

    std::array<ConvLayer<T>, 3> stem;
    std::array<std::array<ConvLayer<T>, 2>, kResBlocks> res;

    [[nodiscard]] std::size_t channels() const { return stem[0].out_channels; }
    [[nodiscard]] std::size_t image_channels() const { return stem[0].in_channels; }

    static RefEncoder from_bundle(const WeightBundle& w) {
        RefEncoder e;
        e.stem[0] = load_conv<T>(w, "ref.conv1", {0, 0, 3, 3});
        const std::size_t C = e.stem[0].out_channels;
        if (e.stem[0].in_channels != 1 && e.stem[0].in_channels != 3) {
            throw WeightError("'ref.conv1.w' must take 1 or 3 image channels");
        }
        e.stem[1] = load_conv<T>(w, "ref.conv2", {C, C, 3, 3});
        e.stem[2] = load_conv<T>(w, "ref.conv3", {C, C, 3, 3});
        for (std::size_t r = 0; r < kResBlocks; ++r)
            for (std::size_t j = 0; j < 2; ++j)
                e.res[r][j] = load_conv<T>(w, "ref.res" + std::to_string(r + 1) + ".conv" + std::to_string(j + 1),
                                           {C, C, 3, 3});
        return e;
    }

    void store(WeightBundle& w) const {
        for (std::size_t i = 0; i < 3; ++i) stem[i].store(w, "ref.conv" + std::to_string(i + 1));
        for (std::size_t r = 0; r < kResBlocks; ++r)
            for (std::size_t j = 0; j < 2; ++j)
                res[r][j].store(w, "ref.res" + std::to_string(r + 1) + ".conv" + std::to_string(j + 1));
    }

    [[nodiscard]] Tensor<T> encode(const Tensor<T>& img) const {
        if (img.height() < 8 || img.width() < 8) {
            throw DegenerateSizeError("reference encoder needs at least 8x8, got " + img.shape_string());
        }
        if (img.channels() != image_channels()) {
            throw WeightError("reference encoder expects " + std::to_string(image_channels()) +
                              "-channel images, got " + img.shape_string());
        }
        Tensor<T> x = relu(conv2d(img, stem[0]));
        x = relu(conv2d(x, stem[1]));
        x = conv2d(x, stem[2]);
        for (const auto& block : res) {
            Tensor<T> r = conv2d(relu(conv2d(x, block[0])), block[1]);
            add_inplace(x, r);
        }
        return x;
    }
};

/// F_ref for one pyramid level.
inline FeatureMap ref_encode(const ImageBuf& img, const WeightBundle& w) {
    return RefEncoder<float>::from_bundle(w).encode(img);
}

}  // namespace refdeblur
