#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "refdeblur/core/resample.hpp"

namespace refdeblur {

/// K-level stack. levels[0] is scale k = 1 (full resolution); levels[k-1]
/// has dims ceil(H / 2^(k-1)) x ceil(W / 2^(k-1)).
template <class Grid>
struct Pyramid {
    std::vector<Grid> levels;

    [[nodiscard]] std::size_t depth() const noexcept { return levels.size(); }
    [[nodiscard]] const Grid& level(std::size_t k) const { return levels.at(k - 1); }
    [[nodiscard]] const Grid& finest() const { return levels.front(); }
    [[nodiscard]] const Grid& coarsest() const { return levels.back(); }
};

using ImagePyramid = Pyramid<ImageBuf>;
using FeaturePyramid = Pyramid<FeatureMap>;

/// Smallest side any pyramid level may have.
inline constexpr std::size_t kMinPyramidSide = 8;

[[nodiscard]] constexpr std::size_t ceil_half_pow(std::size_t n, std::size_t k) noexcept {
    for (std::size_t i = 1; i < k; ++i) n = (n + 1) / 2;
    return n;
}

inline ImagePyramid build_pyramid(const ImageBuf& img, std::size_t K) {
    if (K < 1) throw ContractViolation("pyramid depth must be >= 1");
    if (K > 1) {
        const std::size_t side = std::min(img.height(), img.width());
        if ((side >> (K - 1)) < kMinPyramidSide) {
            throw DegenerateSizeError("image " + img.shape_string() + " too small for a " + std::to_string(K) +
                                      "-level pyramid");
        }
    }
    ImagePyramid pyr;
    pyr.levels.reserve(K);
    pyr.levels.push_back(img);
    for (std::size_t k = 1; k < K; ++k) pyr.levels.push_back(downscale_half(pyr.levels.back()));
    return pyr;
}

/// Area-mean chain over arbitrary grids, without the minimum-side rule.
template <class T>
Pyramid<Tensor<T>> downscale_chain(const Tensor<T>& base, std::size_t K) {
    if (K < 1) throw ContractViolation("pyramid depth must be >= 1");
    Pyramid<Tensor<T>> pyr;
    pyr.levels.push_back(base);
    for (std::size_t k = 1; k < K; ++k) pyr.levels.push_back(downscale_half(pyr.levels.back()));
    return pyr;
}

}  // namespace refdeblur
