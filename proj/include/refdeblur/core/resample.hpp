#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "refdeblur/core/tensor.hpp"

namespace refdeblur {

namespace detail {

template <class T>
Tensor<T> downscale_half_raw(const Tensor<T>& in) {
    if (in.height() < 2 && in.width() < 2) {
        throw DegenerateSizeError("cannot downscale a " + in.shape_string() + " grid");
    }
    const std::size_t oh = (in.height() + 1) / 2;
    const std::size_t ow = (in.width() + 1) / 2;
    Tensor<T> out(oh, ow, in.channels());
    for (std::size_t c = 0; c < in.channels(); ++c) {
        for (std::size_t y = 0; y < oh; ++y) {
            const std::size_t y1 = std::min(2 * y + 1, in.height() - 1);
            for (std::size_t x = 0; x < ow; ++x) {
                const std::size_t x1 = std::min(2 * x + 1, in.width() - 1);
                double sum = 0.0;
                int n = 0;
                for (std::size_t sy = 2 * y; sy <= y1; ++sy) {
                    for (std::size_t sx = 2 * x; sx <= x1; ++sx) {
                        sum += static_cast<double>(in(sx, sy, c));
                        ++n;
                    }
                }
                out(x, y, c) = static_cast<T>(sum / n);
            }
        }
    }
    return out;
}

}  // namespace detail

/// 2x2 area-mean reduction; output is ceil(H/2) x ceil(W/2) and edge blocks
/// of odd-sized inputs average only the pixels they cover.
inline ImageBuf downscale_half(const ImageBuf& img) {
    auto t = detail::downscale_half_raw<float>(img);
    return ImageBuf(t.height(), t.width(), t.channels(), std::vector<float>(t.values().begin(), t.values().end()));
}

template <class T>
Tensor<T> downscale_half(const Tensor<T>& map) {
    return detail::downscale_half_raw(map);
}

/// Nearest-neighbour 2x upsampling. When target dims are given (the finer
/// pyramid level may be odd-sized) the 2H x 2W result is cropped to them.
template <class T>
Tensor<T> upsample_nearest_2x(const Tensor<T>& map, std::size_t target_h = 0, std::size_t target_w = 0) {
    const std::size_t oh = target_h ? target_h : 2 * map.height();
    const std::size_t ow = target_w ? target_w : 2 * map.width();
    if (oh > 2 * map.height() || ow > 2 * map.width() || oh + 1 < 2 * map.height() ||
        ow + 1 < 2 * map.width()) {
        throw ContractViolation("upsample target " + std::to_string(oh) + "x" + std::to_string(ow) +
                                " is not a 2x crop of " + map.shape_string());
    }
    Tensor<T> out(oh, ow, map.channels());
    for (std::size_t c = 0; c < map.channels(); ++c)
        for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x) out(x, y, c) = map(x / 2, y / 2, c);
    return out;
}

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

/// BT.601 luminance. Single-channel inputs pass through unchanged.
template <std::floating_point T>
Tensor<T> to_luma(const Tensor<T>& img) {
    if (img.channels() == 1) return img;
    if (img.channels() != 3) {
        throw ContractViolation("to_luma expects 1 or 3 channels, got " + std::to_string(img.channels()));
    }
    Tensor<T> out(img.height(), img.width(), 1);
    for (std::size_t y = 0; y < img.height(); ++y)
        for (std::size_t x = 0; x < img.width(); ++x)
            out(x, y) = static_cast<T>(kLumaR * img(x, y, 0) + kLumaG * img(x, y, 1) + kLumaB * img(x, y, 2));
    return out;
}

inline ImageBuf to_luma(const ImageBuf& img) {
    const auto& base = static_cast<const Tensor<float>&>(img);
    return ImageBuf::from(to_luma(base));
}

/// Separable Gaussian blur with edge replication; kernel radius ceil(3 sigma).
template <std::floating_point T>
Tensor<T> gaussian_blur(const Tensor<T>& img, double sigma) {
    if (sigma <= 0.0) return img;
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double norm = 0.0;
    for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        norm += v;
    }
    for (double& v : k) v /= norm;

    const auto h = static_cast<std::ptrdiff_t>(img.height());
    const auto w = static_cast<std::ptrdiff_t>(img.width());
    Tensor<double> tmp(img.height(), img.width(), img.channels());
    Tensor<T> out(img.height(), img.width(), img.channels());
    for (std::size_t c = 0; c < img.channels(); ++c) {
        for (std::ptrdiff_t y = 0; y < h; ++y)
            for (std::ptrdiff_t x = 0; x < w; ++x) {
                double acc = 0.0;
                for (std::ptrdiff_t i = -radius; i <= radius; ++i)
                    acc += k[static_cast<std::size_t>(i + radius)] * img.clamped(x + i, y, c);
                tmp(static_cast<std::size_t>(x), static_cast<std::size_t>(y), c) = acc;
            }
        for (std::ptrdiff_t y = 0; y < h; ++y)
            for (std::ptrdiff_t x = 0; x < w; ++x) {
                double acc = 0.0;
                for (std::ptrdiff_t i = -radius; i <= radius; ++i)
                    acc += k[static_cast<std::size_t>(i + radius)] * tmp.clamped(x, y + i, c);
                out(static_cast<std::size_t>(x), static_cast<std::size_t>(y), c) = static_cast<T>(acc);
            }
    }
    return out;
}

inline ImageBuf gaussian_blur(const ImageBuf& img, double sigma) {
    return ImageBuf::from(gaussian_blur(static_cast<const Tensor<float>&>(img), sigma));
}

}  // namespace refdeblur
