#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "refdeblur/core/resample.hpp"
#include "refdeblur/features/conv.hpp"

namespace refdeblur {

/// Deterministic 6-channel descriptor computed on luma:
/// [luma, Sobel-x, Sobel-y, 4-neighbour Laplacian, 3x3 box mean, 3x3 local std].
struct FixedBank {
    static constexpr std::size_t kChannels = 6;
};

/// Learned extractor: convolutions with ReLU between consecutive layers.
struct ConvStack {
    std::vector<ConvLayer<float>> layers;

    /// Reads "<prefix>.conv1", "<prefix>.conv2", ... until the first missing index.
    static ConvStack from_bundle(const WeightBundle& bundle, const std::string& prefix = "phi") {
        ConvStack s;
        for (std::size_t i = 1; bundle.contains(prefix + ".conv" + std::to_string(i) + ".w"); ++i) {
            s.layers.push_back(load_conv<float>(bundle, prefix + ".conv" + std::to_string(i)));
        }
        if (s.layers.empty()) throw WeightError("no '" + prefix + ".conv1.w' tensor in bundle");
        s.validate();
        return s;
    }

    void validate() const {
        if (layers.empty()) throw WeightError("conv-stack extractor has no layers");
        for (std::size_t i = 0; i < layers.size(); ++i) {
            if (layers[i].stride != 1) throw WeightError("extractor layers must use stride 1 to keep the grid");
            if (i + 1 < layers.size() && layers[i].out_channels != layers[i + 1].in_channels) {
                throw WeightError("extractor layer " + std::to_string(i + 1) + " outputs " +
                                  std::to_string(layers[i].out_channels) + " channels but layer " +
                                  std::to_string(i + 2) + " expects " + std::to_string(layers[i + 1].in_channels));
            }
        }
    }

    [[nodiscard]] std::size_t max_kernel() const {
        std::size_t k = 1;
        for (const auto& l : layers) k = std::max({k, l.kernel_h, l.kernel_w});
        return k;
    }
};

using Extractor = std::variant<FixedBank, ConvStack>;

namespace detail {

inline FeatureMap fixed_bank_features(const ImageBuf& img) {
    const ImageBuf luma = to_luma(img);
    const std::size_t h = luma.height(), w = luma.width();
    FeatureMap out(h, w, FixedBank::kChannels);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            double n[3][3];
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    n[dy + 1][dx + 1] = luma.clamped(static_cast<std::ptrdiff_t>(x) + dx,
                                                     static_cast<std::ptrdiff_t>(y) + dy);
            const double sx = (n[0][2] + 2.0 * n[1][2] + n[2][2]) - (n[0][0] + 2.0 * n[1][0] + n[2][0]);
            const double sy = (n[2][0] + 2.0 * n[2][1] + n[2][2]) - (n[0][0] + 2.0 * n[0][1] + n[0][2]);
            const double lap = n[0][1] + n[1][0] + n[1][2] + n[2][1] - 4.0 * n[1][1];
            double sum = 0.0;
            for (auto& row : n)
                for (double v : row) sum += v;
            const double mean = sum / 9.0;
            double var = 0.0;
            for (auto& row : n)
                for (double v : row) var += (v - mean) * (v - mean);
            out(x, y, 0) = static_cast<float>(n[1][1]);
            out(x, y, 1) = static_cast<float>(sx);
            out(x, y, 2) = static_cast<float>(sy);
            out(x, y, 3) = static_cast<float>(lap);
            out(x, y, 4) = static_cast<float>(mean);
            out(x, y, 5) = static_cast<float>(std::sqrt(var / 9.0));
        }
    }
    return out;
}

}  // namespace detail

/// Embeds an image into an H x W feature grid (edge-replicated padding throughout).
inline FeatureMap extract_features(const ImageBuf& img, const Extractor& ex) {
    return std::visit(
        [&](const auto& e) -> FeatureMap {
            using E = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<E, FixedBank>) {
                if (img.height() < 3 || img.width() < 3) {
                    throw DegenerateSizeError("fixed bank needs at least 3x3, got " + img.shape_string());
                }
                return detail::fixed_bank_features(img);
            } else {
                e.validate();
                const std::size_t k = e.max_kernel();
                if (img.height() < k || img.width() < k) {
                    throw DegenerateSizeError("image " + img.shape_string() + " smaller than a " + std::to_string(k) +
                                              "-wide kernel");
                }
                FeatureMap f = img;
                for (std::size_t i = 0; i < e.layers.size(); ++i) {
                    f = conv2d(f, e.layers[i]);
                    if (i + 1 < e.layers.size()) f = relu(std::move(f));
                }
                return f;
            }
        },
        ex);
}

}  // namespace refdeblur
