#pragma once

#include <array>
#include <cmath>
#include <limits>

#include "refdeblur/core/resample.hpp"

namespace refdeblur {

/// 10 log10(1 / MSE) for [0, 1] data; +inf when the images are identical.
template <class T>
double psnr(const Tensor<T>& truth, const Tensor<T>& est) {
    if (!truth.same_shape(est)) throw ContractViolation("psnr of " + truth.shape_string() + " vs " + est.shape_string());
    if (truth.empty()) throw DegenerateSizeError("psnr of empty images");
    double se = 0.0;
    auto a = truth.values();
    auto b = est.values();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        se += d * d;
    }
    const double mse = se / static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

struct SsimParams {
    static constexpr std::size_t kWindow = 11;
    static constexpr double kSigma = 1.5;
    static constexpr double kK1 = 0.01;
    static constexpr double kK2 = 0.03;
    static constexpr double kRange = 1.0;
};

/// Normalized 11-tap Gaussian, sigma 1.5.
inline std::array<double, SsimParams::kWindow> ssim_kernel_1d() {
    std::array<double, SsimParams::kWindow> k{};
    const int r = static_cast<int>(SsimParams::kWindow / 2);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        k[static_cast<std::size_t>(i + r)] = std::exp(-static_cast<double>(i * i) / (2.0 * SsimParams::kSigma * SsimParams::kSigma));
        sum += k[static_cast<std::size_t>(i + r)];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Mean SSIM over all fully-contained 11x11 windows of the luma planes.
template <std::floating_point T>
double ssim(const Tensor<T>& truth, const Tensor<T>& est) {
    if (!truth.same_shape(est)) throw ContractViolation("ssim of " + truth.shape_string() + " vs " + est.shape_string());
    constexpr std::size_t win = SsimParams::kWindow;
    if (truth.height() < win || truth.width() < win) {
        throw DegenerateSizeError("ssim needs at least 11x11, got " + truth.shape_string());
    }
    const auto a = tensor_cast<double>(to_luma(truth));
    const auto b = tensor_cast<double>(to_luma(est));
    const auto k = ssim_kernel_1d();
    const std::size_t h = a.height(), w = a.width();
    const std::size_t oh = h - win + 1, ow = w - win + 1;

    // Horizontal pass over the five moment planes, then vertical.
    constexpr int kMoments = 5;
    std::vector<double> horiz(kMoments * h * ow, 0.0);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double m[kMoments] = {};
            for (std::size_t i = 0; i < win; ++i) {
                const double va = a(x + i, y), vb = b(x + i, y), wt = k[i];
                m[0] += wt * va;
                m[1] += wt * vb;
                m[2] += wt * va * va;
                m[3] += wt * vb * vb;
                m[4] += wt * va * vb;
            }
            for (int j = 0; j < kMoments; ++j) horiz[(j * h + y) * ow + x] = m[j];
        }

    const double c1 = (SsimParams::kK1 * SsimParams::kRange) * (SsimParams::kK1 * SsimParams::kRange);
    const double c2 = (SsimParams::kK2 * SsimParams::kRange) * (SsimParams::kK2 * SsimParams::kRange);
    double total = 0.0;
    for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double m[kMoments] = {};
            for (std::size_t i = 0; i < win; ++i)
                for (int j = 0; j < kMoments; ++j) m[j] += k[i] * horiz[(j * h + y + i) * ow + x];
            const double mu_a = m[0], mu_b = m[1];
            const double var_a = m[2] - mu_a * mu_a, var_b = m[3] - mu_b * mu_b, cov = m[4] - mu_a * mu_b;
            total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                     ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
        }
    return total / static_cast<double>(oh * ow);
}

}  // namespace refdeblur
