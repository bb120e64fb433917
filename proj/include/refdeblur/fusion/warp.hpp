#pragma once

#include <string>

#include "refdeblur/matcher/match.hpp"

namespace refdeblur {

/// Gathers reference features through the index map: output(x, y) is the
/// reference feature vector at the matched coordinates. No interpolation.
template <class T>
Tensor<T> warp_features(const Tensor<T>& ref, const IndexMap& index) {
    const std::size_t n = ref.pixels();
    Tensor<T> out(index.height(), index.width(), ref.channels());
    for (std::size_t y = 0; y < index.height(); ++y)
        for (std::size_t x = 0; x < index.width(); ++x) {
            const std::uint32_t j = index(x, y);
            if (j >= n) {
                throw ContractViolation("index " + std::to_string(j) + " at pixel (" + std::to_string(x) + "," +
                                        std::to_string(y) + ") outside reference grid " + ref.shape_string());
            }
            const std::size_t rx = j % ref.width(), ry = j / ref.width();
            for (std::size_t c = 0; c < ref.channels(); ++c) out(x, y, c) = ref(rx, ry, c);
        }
    return out;
}

template <class T>
Tensor<T> warp_features(const Tensor<T>& ref, const MatchResult& m) {
    if (m.ref_width != 0 && (m.ref_width != ref.width() || m.ref_height != ref.height())) {
        throw ContractViolation("match was computed against a " + std::to_string(m.ref_height) + "x" +
                                std::to_string(m.ref_width) + " reference, warping " + ref.shape_string());
    }
    return warp_features(ref, m.index);
}

}  // namespace refdeblur
