#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "refdeblur/core/random.hpp"
#include "refdeblur/core/tensor.hpp"

namespace synth {

using refdeblur::FeatureMap;
using refdeblur::ImageBuf;
using refdeblur::Rng;
using refdeblur::Tensor;

inline ImageBuf random_image(std::size_t h, std::size_t w, std::size_t c, Rng& rng) {
    std::vector<float> v(h * w * c);
    for (float& x : v) x = static_cast<float>(refdeblur::uniform01(rng));
    return ImageBuf(h, w, c, std::move(v));
}

inline FeatureMap random_map(std::size_t h, std::size_t w, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    FeatureMap f(h, w, c);
    for (float& x : f.values()) x = static_cast<float>(refdeblur::uniform(rng, lo, hi));
    return f;
}

inline Tensor<double> random_tensor(std::size_t h, std::size_t w, std::size_t c, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor<double> t(h, w, c);
    for (double& x : t.values()) x = refdeblur::uniform(rng, lo, hi);
    return t;
}

/// Bilinear value noise summed over octaves with 1/f amplitude falloff.
inline std::vector<double> value_noise(std::size_t h, std::size_t w, Rng& rng, std::size_t base_cell = 32,
                                       int octaves = 5) {
    std::vector<double> out(h * w, 0.0);
    double amp = 1.0, total = 0.0;
    std::size_t cell = base_cell;
    for (int o = 0; o < octaves && cell >= 1; ++o, cell /= 2, amp *= 0.5) {
        const std::size_t gh = h / cell + 2, gw = w / cell + 2;
        std::vector<double> grid(gh * gw);
        for (double& g : grid) g = refdeblur::uniform01(rng);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                const double fx = static_cast<double>(x) / static_cast<double>(cell);
                const double fy = static_cast<double>(y) / static_cast<double>(cell);
                const auto x0 = static_cast<std::size_t>(fx), y0 = static_cast<std::size_t>(fy);
                const double tx = fx - static_cast<double>(x0), ty = fy - static_cast<double>(y0);
                const double a = grid[y0 * gw + x0], b = grid[y0 * gw + x0 + 1];
                const double c = grid[(y0 + 1) * gw + x0], d = grid[(y0 + 1) * gw + x0 + 1];
                out[y * w + x] += amp * ((a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty);
            }
        total += amp;
    }
    for (double& v : out) v /= total;
    return out;
}

/// Fine high-contrast grey texture (value noise, 2 px cells) that patch matching can lock onto.
inline ImageBuf fine_texture(std::size_t h, std::size_t w, std::uint64_t seed) {
    Rng rng(seed);
    const std::vector<double> v = value_noise(h, w, rng, 2, 2);
    std::vector<float> data(3 * h * w);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < h * w; ++i)
            data[c * h * w + i] = static_cast<float>(std::clamp(2.0 * (v[i] - 0.5) + 0.5, 0.0, 1.0));
    return ImageBuf(h, w, 3, std::move(data));
}

/// Grayscale-ish scene of noise, hard-edged discs and rectangles, varied by `kind`.
inline ImageBuf natural_image(std::size_t h, std::size_t w, std::size_t channels, int kind, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> base = value_noise(h, w, rng, 8u << (kind % 3), 4 + kind % 3);
    auto paint = [&](auto inside, double value) {
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                if (inside(static_cast<double>(x), static_cast<double>(y))) base[y * w + x] = value;
    };
    const int shapes = 3 + kind % 5;
    for (int s = 0; s < shapes; ++s) {
        const double cx = refdeblur::uniform(rng, 0, static_cast<double>(w));
        const double cy = refdeblur::uniform(rng, 0, static_cast<double>(h));
        const double r = refdeblur::uniform(rng, 3, static_cast<double>(std::min(h, w)) / 4);
        const double v = refdeblur::uniform01(rng);
        if ((s + kind) % 2 == 0) {
            paint([&](double x, double y) { return (x - cx) * (x - cx) + (y - cy) * (y - cy) < r * r; }, v);
        } else {
            paint([&](double x, double y) { return std::abs(x - cx) < r && std::abs(y - cy) < 0.6 * r; }, v);
        }
    }
    if (kind % 4 == 1) {
        const double f = refdeblur::uniform(rng, 0.05, 0.2), ang = refdeblur::uniform(rng, 0, std::numbers::pi);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                base[y * w + x] = 0.7 * base[y * w + x] +
                                  0.3 * (0.5 + 0.5 * std::sin(2 * std::numbers::pi * f *
                                                              (std::cos(ang) * x + std::sin(ang) * y)));
    }
    std::vector<float> data(h * w * channels);
    for (std::size_t c = 0; c < channels; ++c) {
        const double gain = channels == 1 ? 1.0 : refdeblur::uniform(rng, 0.7, 1.0);
        for (std::size_t i = 0; i < h * w; ++i)
            data[c * h * w + i] = static_cast<float>(std::clamp(0.05 + 0.9 * gain * base[i], 0.0, 1.0));
    }
    return ImageBuf(h, w, channels, std::move(data));
}

template <class T>
Tensor<T> crop(const Tensor<T>& t, std::size_t x0, std::size_t y0, std::size_t h, std::size_t w) {
    Tensor<T> out(h, w, t.channels());
    for (std::size_t c = 0; c < t.channels(); ++c)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) out(x, y, c) = t(x0 + x, y0 + y, c);
    return out;
}

inline ImageBuf crop(const ImageBuf& img, std::size_t x0, std::size_t y0, std::size_t h, std::size_t w) {
    return ImageBuf::from(crop(static_cast<const Tensor<float>&>(img), x0, y0, h, w));
}

/// Feature map where every 3x3 patch direction is distinct: random values.
inline FeatureMap distinct_map(std::size_t h, std::size_t w, std::size_t c, std::uint64_t seed) {
    Rng rng(seed);
    return random_map(h, w, c, rng);
}

template <class T>
Tensor<T> circular_shift(const Tensor<T>& t, std::size_t sx, std::size_t sy) {
    Tensor<T> out(t.height(), t.width(), t.channels());
    for (std::size_t c = 0; c < t.channels(); ++c)
        for (std::size_t y = 0; y < t.height(); ++y)
            for (std::size_t x = 0; x < t.width(); ++x)
                out((x + sx) % t.width(), (y + sy) % t.height(), c) = t(x, y, c);
    return out;
}

}  // namespace synth
