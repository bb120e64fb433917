#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "refdeblur/core/tensor.hpp"

namespace refdeblur {

/// 3x3 patches, stride 1, edge replication: one patch per pixel.
struct PatchSpec {
    static constexpr std::size_t kSize = 3;
    static constexpr std::size_t kStride = 1;

    [[nodiscard]] static constexpr std::size_t dim(std::size_t channels) noexcept { return kSize * kSize * channels; }
};

/// Norms below this count as zero; cosine against such a patch is 0.
inline constexpr double kZeroNorm = 1e-12;

/// Flattened 3x3xC neighbourhood of (x, y) in (dy, dx, c) order.
template <class T>
std::vector<double> patch_vector(const Tensor<T>& f, std::size_t x, std::size_t y) {
    if (x >= f.width() || y >= f.height()) {
        throw ContractViolation("patch centre (" + std::to_string(x) + "," + std::to_string(y) + ") outside " +
                                f.shape_string());
    }
    std::vector<double> v;
    v.reserve(PatchSpec::dim(f.channels()));
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
            for (std::size_t c = 0; c < f.channels(); ++c)
                v.push_back(static_cast<double>(
                    f.clamped(static_cast<std::ptrdiff_t>(x) + dx, static_cast<std::ptrdiff_t>(y) + dy, c)));
    return v;
}

[[nodiscard]] inline double l2_norm(std::span<const double> p) noexcept {
    double s = 0.0;
    for (double v : p) s += v * v;
    return std::sqrt(s);
}

/// Cosine from precomputed dot product and norms.
[[nodiscard]] inline double cosine_from_dot(double dot, double norm_p, double norm_q) noexcept {
    if (norm_p < kZeroNorm || norm_q < kZeroNorm) return 0.0;
    return std::clamp(dot / (norm_p * norm_q), -1.0, 1.0);
}

/// p.q / (|p||q|), clamped into [-1, 1]; zero if either norm is below 1e-12.
[[nodiscard]] inline double cosine_sim(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw ContractViolation("cosine_sim on vectors of length " + std::to_string(p.size()) + " and " +
                                std::to_string(q.size()));
    }
    double dot = 0.0;
    for (std::size_t d = 0; d < p.size(); ++d) dot += p[d] * q[d];
    return cosine_from_dot(dot, l2_norm(p), l2_norm(q));
}

/// All patches of a map, row-major by patch index, plus their norms.
struct PatchMatrix {
    std::size_t count = 0;
    std::size_t dim = 0;
    std::vector<double> rows;
    std::vector<double> norms;

    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept { return {rows.data() + i * dim, dim}; }
};

template <class T>
PatchMatrix extract_patches(const Tensor<T>& f) {
    PatchMatrix m;
    m.count = f.pixels();
    m.dim = PatchSpec::dim(f.channels());
    m.rows.resize(m.count * m.dim);
    m.norms.resize(m.count);
    for (std::size_t y = 0; y < f.height(); ++y)
        for (std::size_t x = 0; x < f.width(); ++x) {
            const std::size_t i = y * f.width() + x;
            double* out = m.rows.data() + i * m.dim;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    for (std::size_t c = 0; c < f.channels(); ++c)
                        *out++ = static_cast<double>(f.clamped(static_cast<std::ptrdiff_t>(x) + dx,
                                                               static_cast<std::ptrdiff_t>(y) + dy, c));
            m.norms[i] = l2_norm(m.row(i));
        }
    return m;
}

}  // namespace refdeblur
