#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "refdeblur/errors.hpp"

namespace refdeblur {

/// H x W x C grid stored channel-planar, each plane row-major:
/// element (x, y, c) lives at ((c * H) + y) * W + x.
template <class T>
class Tensor {
public:
    using value_type = T;

    Tensor() = default;

    Tensor(std::size_t height, std::size_t width, std::size_t channels, T fill = T{})
        : height_(height), width_(width), channels_(channels),
          data_(height * width * channels, fill) {}

    Tensor(std::size_t height, std::size_t width, std::size_t channels, std::vector<T> data)
        : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
        if (data_.size() != height_ * width_ * channels_) {
            throw ContractViolation("tensor data length " + std::to_string(data_.size()) +
                                    " does not match " + shape_string());
        }
    }

    [[nodiscard]] std::size_t height() const noexcept { return height_; }
    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] std::size_t channels() const noexcept { return channels_; }
    [[nodiscard]] std::size_t pixels() const noexcept { return height_ * width_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] T& operator()(std::size_t x, std::size_t y, std::size_t c = 0) noexcept {
        return data_[(c * height_ + y) * width_ + x];
    }
    [[nodiscard]] const T& operator()(std::size_t x, std::size_t y, std::size_t c = 0) const noexcept {
        return data_[(c * height_ + y) * width_ + x];
    }

    /// Edge-replicated read: coordinates outside the grid snap to the nearest edge.
    [[nodiscard]] const T& clamped(std::ptrdiff_t x, std::ptrdiff_t y, std::size_t c = 0) const noexcept {
        const auto cx = std::clamp<std::ptrdiff_t>(x, 0, static_cast<std::ptrdiff_t>(width_) - 1);
        const auto cy = std::clamp<std::ptrdiff_t>(y, 0, static_cast<std::ptrdiff_t>(height_) - 1);
        return (*this)(static_cast<std::size_t>(cx), static_cast<std::size_t>(cy), c);
    }

    [[nodiscard]] std::span<T> plane(std::size_t c) noexcept {
        return {data_.data() + c * pixels(), pixels()};
    }
    [[nodiscard]] std::span<const T> plane(std::size_t c) const noexcept {
        return {data_.data() + c * pixels(), pixels()};
    }

    [[nodiscard]] std::span<T> values() noexcept { return data_; }
    [[nodiscard]] std::span<const T> values() const noexcept { return data_; }
    [[nodiscard]] const std::vector<T>& storage() const noexcept { return data_; }

    [[nodiscard]] bool same_shape(const Tensor& o) const noexcept {
        return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
    }
    [[nodiscard]] bool same_grid(std::size_t h, std::size_t w) const noexcept {
        return height_ == h && width_ == w;
    }

    [[nodiscard]] std::string shape_string() const {
        return std::to_string(height_) + "x" + std::to_string(width_) + "x" + std::to_string(channels_);
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 0;
    std::vector<T> data_;
};

/// Real-valued feature grid. Unclamped.
using FeatureMap = Tensor<float>;

/// Single-channel map of linear indices into a reference grid.
using IndexMap = Tensor<std::uint32_t>;

/// Raster with 1 or 3 channels and every value in [0, 1].
class ImageBuf : public Tensor<float> {
public:
    ImageBuf() = default;

    ImageBuf(std::size_t height, std::size_t width, std::size_t channels, float fill = 0.0f)
        : Tensor<float>(height, width, channels, fill) {
        check_channels();
        if (!(fill >= 0.0f && fill <= 1.0f)) throw ContractViolation("image fill outside [0,1]");
    }

    /// Wraps raw values, rejecting non-finite entries and clamping the rest into [0, 1].
    ImageBuf(std::size_t height, std::size_t width, std::size_t channels, std::vector<float> data)
        : Tensor<float>(height, width, channels, std::move(data)) {
        check_channels();
        for (float& v : values()) {
            if (!std::isfinite(v)) throw ContractViolation("image contains a non-finite value");
            v = std::clamp(v, 0.0f, 1.0f);
        }
    }

    /// Same as the data constructor, starting from any real tensor.
    template <std::floating_point T>
    static ImageBuf from(const Tensor<T>& t) {
        std::vector<float> v(t.size());
        std::transform(t.values().begin(), t.values().end(), v.begin(),
                       [](T x) { return static_cast<float>(x); });
        return ImageBuf(t.height(), t.width(), t.channels(), std::move(v));
    }

private:
    void check_channels() const {
        if (channels() != 1 && channels() != 3) {
            throw ContractViolation("image must have 1 or 3 channels, got " + std::to_string(channels()));
        }
    }
};

/// Row-major bijection between 0-based (x, y) and linear patch indices.
struct GridIndexing {
    std::size_t width = 0;

    [[nodiscard]] constexpr std::size_t index(std::size_t x, std::size_t y) const noexcept { return y * width + x; }
    [[nodiscard]] constexpr std::size_t x_of(std::size_t i) const noexcept { return i % width; }
    [[nodiscard]] constexpr std::size_t y_of(std::size_t i) const noexcept { return i / width; }
};

template <std::floating_point To, class From>
Tensor<To> tensor_cast(const Tensor<From>& t) {
    std::vector<To> v(t.size());
    std::transform(t.values().begin(), t.values().end(), v.begin(),
                   [](From x) { return static_cast<To>(x); });
    return Tensor<To>(t.height(), t.width(), t.channels(), std::move(v));
}

template <class T>
bool all_finite(const Tensor<T>& t) {
    return std::ranges::all_of(t.values(), [](T v) { return std::isfinite(static_cast<double>(v)); });
}

}  // namespace refdeblur
