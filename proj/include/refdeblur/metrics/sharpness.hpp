#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "refdeblur/core/resample.hpp"
#include "refdeblur/metrics/dft.hpp"

namespace refdeblur {

enum class SharpnessThreshold {
    Relative,  ///< max|CFT| / 1000
    PerPixel,  ///< max|CFT| / (1000 M N); any non-periodic image scores close to 1
};

/// Fraction of centred-spectrum bins of the luma plane whose magnitude
/// strictly exceeds the threshold. Higher is sharper.
template <std::floating_point T>
double sharpness(const Tensor<T>& img, SharpnessThreshold mode = SharpnessThreshold::Relative) {
    if (img.empty()) throw DegenerateSizeError("sharpness of an empty image");
    const auto luma = tensor_cast<double>(to_luma(img));
    const Spectrum centred = fftshift(dft2(luma.values(), luma.height(), luma.width()));
    std::vector<double> mag(centred.bins.size());
    std::ranges::transform(centred.bins, mag.begin(), [](const Complex& z) { return std::abs(z); });
    const double mn = static_cast<double>(mag.size());
    const double divisor = mode == SharpnessThreshold::Relative ? 1000.0 : 1000.0 * mn;
    const double thres = *std::ranges::max_element(mag) / divisor;
    const auto above = std::ranges::count_if(mag, [thres](double m) { return m > thres; });
    return static_cast<double>(above) / mn;
}

}  // namespace refdeblur
