#pragma once

#include <cmath>

#include "refdeblur/core/random.hpp"
#include "refdeblur/features/ref_encoder.hpp"
#include "refdeblur/fusion/fuse.hpp"
#include "refdeblur/pipeline/backbone.hpp"

namespace refdeblur {

struct WeightInit {
    std::size_t C = 16;
    std::size_t image_channels = 3;
    std::uint64_t seed = 0;
    bool zero_fusion = false;  ///< closes the fusion gate: enrich reduces to the backbone
};

namespace detail {

/// He-style normal init scaled by `gain`; biases small.
inline ConvLayer<float> random_conv(Rng& rng, std::size_t out, std::size_t in, std::size_t k, double gain,
                                    bool bias = true) {
    auto l = ConvLayer<float>::zeros(out, in, k, k, bias);
    const double sd = gain * std::sqrt(2.0 / static_cast<double>(in * k * k));
    for (float& v : l.weight) v = static_cast<float>(sd * normal(rng));
    for (float& v : l.bias) v = static_cast<float>(0.01 * normal(rng));
    return l;
}

}  // namespace detail

/// Seeded bundle covering the backbone, reference encoder and fusion convs.
inline WeightBundle make_weights(const WeightInit& init) {
    Rng rng(init.seed);
    const std::size_t C = init.C, I = init.image_channels;
    WeightBundle w;

    Backbone<float> b{detail::random_conv(rng, C, I, 3, 1.0), detail::random_conv(rng, C, C, 3, 1.0),
                      detail::random_conv(rng, C, C, 1, 0.5, false), detail::random_conv(rng, I, C, 1, 0.05)};
    b.store(w);

    RefEncoder<float> e;
    e.stem = {detail::random_conv(rng, C, I, 3, 1.0), detail::random_conv(rng, C, C, 3, 1.0),
              detail::random_conv(rng, C, C, 3, 1.0)};
    for (auto& block : e.res) block = {detail::random_conv(rng, C, C, 3, 0.5), detail::random_conv(rng, C, C, 3, 0.5)};
    e.store(w);

    FusionWeights<float> f = init.zero_fusion
                                 ? FusionWeights<float>::zeros(C)
                                 : FusionWeights<float>{detail::random_conv(rng, C, 2 * C, 3, 0.5),
                                                        detail::random_conv(rng, C, 1, 1, 0.5)};
    f.store(w);
    return w;
}

}  // namespace refdeblur
