#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "refdeblur/metrics/losses.hpp"
#include "refdeblur/metrics/quality.hpp"
#include "refdeblur/metrics/sharpness.hpp"
#include "refdeblur/pipeline/grad_check.hpp"
#include "synth.hpp"

using namespace refdeblur;

namespace {

using Pyr = std::vector<Tensor<double>>;

Pyr random_pyramid(Rng& rng, std::size_t h, std::size_t w, std::size_t c, std::size_t K) {
    Pyr p;
    for (std::size_t k = 0; k < K; ++k, h = (h + 1) / 2, w = (w + 1) / 2)
        p.push_back(synth::random_tensor(h, w, c, rng, 0.0, 1.0));
    return p;
}

double ulp(double v) { return std::nextafter(v, INFINITY) - v; }

double charbonnier_oracle(const Pyr& t, const Pyr& e, double eps) {
    double total = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < t[k].size(); ++i) {
            const double d = e[k].values()[i] - t[k].values()[i];
            acc += std::sqrt(d * d + eps * eps);
        }
        total += acc / static_cast<double>(t[k].size());
    }
    return total;
}

double frequency_oracle(const Pyr& t, const Pyr& e) {
    double total = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        double acc = 0.0;
        for (std::size_t c = 0; c < t[k].channels(); ++c) {
            std::vector<double> d(t[k].pixels());
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = e[k].plane(c)[i] - t[k].plane(c)[i];
            for (const auto& z : oracle::dft(d, t[k].height(), t[k].width())) acc += std::abs(z.real()) + std::abs(z.imag());
        }
        total += acc / (2.0 * static_cast<double>(t[k].size()));
    }
    return total;
}

}  // namespace

TEST(Dft, MatchesNaiveOracleAndRoundTrips) {
    Rng rng(1);
    for (auto [h, w] : {std::pair{8, 8}, std::pair{5, 7}, std::pair{1, 6}}) {
        std::vector<double> plane(h * w);
        for (double& v : plane) v = uniform(rng, -1, 1);
        const Spectrum s = dft2(plane, h, w);
        const auto ref = oracle::dft(plane, h, w);
        for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_LT(std::abs(s.bins[i] - ref[i]), 1e-12);
        const auto back = idft2_real(s);
        for (std::size_t i = 0; i < plane.size(); ++i) EXPECT_NEAR(back[i] / (h * w), plane[i], 1e-14);
    }
}

TEST(Dft, ParsevalOnRandomSizes) {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto h = static_cast<std::size_t>(uniform_int(rng, 8, 64));
        const auto w = static_cast<std::size_t>(uniform_int(rng, 8, 64));
        std::vector<double> plane(h * w);
        for (double& v : plane) v = uniform01(rng);
        const Spectrum s = dft2(plane, h, w);
        double lhs = 0.0, rhs = 0.0;
        for (const auto& z : s.bins) lhs += std::norm(z);
        for (double v : plane) rhs += v * v;
        rhs *= static_cast<double>(h * w);
        EXPECT_LT(std::abs(lhs - rhs) / rhs, 1e-6);
    }
}

TEST(Dft, ShiftCentresDc) {
    std::vector<double> plane(5 * 4, 1.0);
    const Spectrum c = fftshift(dft2(plane, 5, 4));
    EXPECT_NEAR(std::abs(c(2, 2)), 20.0, 1e-12);
    EXPECT_THROW(dft2(plane, 3, 3), ContractViolation);
}

TEST(Charbonnier, IdenticalPyramids) {
    Rng rng(3);
    const Pyr p = random_pyramid(rng, 16, 16, 3, 3);
    const double v = charbonnier(p, p, 1e-3);
    EXPECT_LE(std::abs(v - 3e-3), ulp(3e-3));
}

TEST(Charbonnier, UniformDifference) {
    Tensor<double> t(4, 4, 1, 0.2), e(4, 4, 1, 0.3);
    const double v = charbonnier(Pyr{t}, Pyr{e}, 1e-3);
    EXPECT_NEAR(v, std::sqrt(0.01 + 1e-6), 1e-12);
    EXPECT_NEAR(v, 0.1000050, 1e-7);
}

TEST(Charbonnier, MatchesScalarOracle) {
    Rng rng(4);
    const Pyr t = random_pyramid(rng, 12, 10, 3, 3), e = random_pyramid(rng, 12, 10, 3, 3);
    for (double eps : {1e-3, 0.05}) {
        const double ref = charbonnier_oracle(t, e, eps);
        EXPECT_LT(std::abs(charbonnier(t, e, eps) - ref) / ref, 1e-6);
        EXPECT_GE(charbonnier(t, e, eps), 3 * eps);
    }
}

TEST(Charbonnier, StrictForm) {
    Tensor<double> t(2, 2, 1, 0.0), e(2, 2, 1, 0.5);
    // ||d||_2 = 1, so sqrt(1 + eps^2).
    EXPECT_NEAR(charbonnier(Pyr{t}, Pyr{e}, 1e-3, CharbonnierForm::Strict), std::sqrt(1.0 + 1e-6), 1e-15);
    EXPECT_NEAR(charbonnier(Pyr{t}, Pyr{t}, 1e-3, CharbonnierForm::Strict), 1e-3, 1e-18);
}

TEST(Charbonnier, MisalignedRejected) {
    Rng rng(5);
    const Pyr a = random_pyramid(rng, 8, 8, 1, 2), b = random_pyramid(rng, 8, 9, 1, 2);
    EXPECT_THROW(charbonnier(a, b, 1e-3), ContractViolation);
    EXPECT_THROW(charbonnier(a, Pyr{a[0]}, 1e-3), ContractViolation);
    EXPECT_THROW(frequency_loss(a, b), ContractViolation);
    EXPECT_THROW(total_loss(a, b), ContractViolation);
}

TEST(FrequencyLoss, IdentityAndDcShift) {
    Rng rng(6);
    const Pyr t = random_pyramid(rng, 8, 6, 3, 2);
    EXPECT_EQ(frequency_loss(t, t), 0.0);
    Tensor<double> e = t[0];
    for (double& v : e.values()) v += 0.2;
    EXPECT_NEAR(frequency_loss(Pyr{t[0]}, Pyr{e}), 0.1, 1e-12);
}

TEST(FrequencyLoss, MatchesNaiveDft) {
    Rng rng(7);
    const Pyr t = random_pyramid(rng, 8, 8, 1, 1), e = random_pyramid(rng, 8, 8, 1, 1);
    const double ref = frequency_oracle(t, e);
    EXPECT_LT(std::abs(frequency_loss(t, e) - ref) / ref, 1e-5);
    const Pyr t3 = random_pyramid(rng, 9, 8, 3, 2), e3 = random_pyramid(rng, 9, 8, 3, 2);
    EXPECT_LT(std::abs(frequency_loss(t3, e3) - frequency_oracle(t3, e3)) / frequency_oracle(t3, e3), 1e-5);
    EXPECT_GT(frequency_loss(t, e, FrequencyForm::Modulus), 0.0);
}

TEST(TotalLoss, Composition) {
    Rng rng(8);
    const Pyr p = random_pyramid(rng, 16, 16, 3, 3);
    EXPECT_LE(std::abs(total_loss(p, p) - 3e-3), ulp(3e-3));
    const Pyr q = random_pyramid(rng, 16, 16, 3, 3);
    LossConfig no_freq;
    no_freq.beta = 0.0;
    EXPECT_EQ(total_loss(p, q, no_freq), charbonnier(p, q, 1e-3));
    const LossConfig cfg{0.7, 0.02, 2e-3};
    const double expect = 0.7 * charbonnier(p, q, 2e-3) + 0.02 * frequency_loss(p, q);
    EXPECT_LE(std::abs(total_loss(p, q, cfg) - expect), ulp(expect));
    EXPECT_THROW(total_loss(p, q, LossConfig{-1.0}), ContractViolation);
    EXPECT_THROW(total_loss(p, q, LossConfig{1.0, 0.01, 0.0}), ContractViolation);
}

TEST(LossBackward, ZeroAtIdentityAndScalarForm) {
    Rng rng(9);
    const Pyr p = random_pyramid(rng, 6, 6, 1, 2);
    LossConfig cfg;
    for (const auto& g : charbonnier_backward(p, p, cfg.epsilon))
        for (double v : g.values()) EXPECT_EQ(v, 0.0);

    cfg.beta = 0.0;
    const Pyr t{Tensor<double>(1, 1, 1, 0.3)}, e{Tensor<double>(1, 1, 1, 0.5)};
    const double d = 0.2;
    EXPECT_NEAR(loss_backward(t, e, cfg)[0].values()[0], d / std::sqrt(d * d + 1e-6), 1e-15);
    const Pyr t4{Tensor<double>(2, 2, 1, 0.3)}, e4{Tensor<double>(2, 2, 1, 0.5)};
    EXPECT_NEAR(loss_backward(t4, e4, cfg)[0].values()[0], d / (4 * std::sqrt(d * d + 1e-6)), 1e-15);
}

TEST(LossBackward, FiniteDifferences) {
    for (const GradCheckConfig& cfg : {GradCheckConfig{}, GradCheckConfig{8, 4, 1, 2}}) {
        const auto rep = grad_check(cfg, 5);
        const auto* est = rep.find("estimate");
        ASSERT_NE(est, nullptr);
        EXPECT_LT(est->max_rel_err, 1e-4);
        EXPECT_LT(rep.find("charbonnier")->max_rel_err, 1e-4);
        EXPECT_LT(rep.find("frequency")->max_rel_err, 1e-4);
    }
}

TEST(Psnr, Values) {
    Rng rng(10);
    const ImageBuf a = synth::random_image(8, 8, 3, rng);
    EXPECT_EQ(psnr(a, a), std::numeric_limits<double>::infinity());
    Tensor<double> t(6, 6, 3, 0.5), e(6, 6, 3, 0.5 + 1.0 / 255.0);
    EXPECT_NEAR(psnr(t, e), 20.0 * std::log10(255.0), 1e-9);
    EXPECT_NEAR(psnr(t, e), 48.1308, 5e-5);
    const ImageBuf b = synth::random_image(8, 8, 3, rng);
    EXPECT_NEAR(psnr(a, b), 10.0 * std::log10(1.0 / oracle::mse(a, b)), 1e-12);
    EXPECT_EQ(psnr(a, b), psnr(b, a));
    EXPECT_THROW(psnr(a, synth::random_image(8, 9, 3, rng)), ContractViolation);
}

TEST(Ssim, IdentityAnticorrelationAndOracle) {
    Rng rng(11);
    const ImageBuf a = synth::natural_image(24, 20, 3, 2, 5);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);

    ImageBuf bin(16, 16, 1, 0.0f);
    for (std::size_t i = 0; i < bin.size(); ++i) bin.values()[i] = bernoulli(rng, 0.5) ? 1.0f : 0.0f;
    ImageBuf inv = bin;
    for (float& v : inv.values()) v = 1.0f - v;
    EXPECT_LT(ssim(bin, inv), 0.0);

    const ImageBuf x = synth::random_image(19, 23, 3, rng), y = synth::random_image(19, 23, 3, rng);
    EXPECT_NEAR(ssim(x, y), oracle::ssim(x, y), 1e-5);
    const ImageBuf n = synth::natural_image(32, 32, 1, 1, 9);
    const ImageBuf m = ImageBuf::from(gaussian_blur(static_cast<const Tensor<float>&>(n), 1.0));
    EXPECT_NEAR(ssim(n, m), oracle::ssim(n, m), 1e-5);
    EXPECT_THROW(ssim(ImageBuf(10, 20, 1, 0.5f), ImageBuf(10, 20, 1, 0.5f)), DegenerateSizeError);
    EXPECT_THROW(ssim(x, n), ContractViolation);
}

TEST(Sharpness, ConstantAndZero) {
    for (auto mode : {SharpnessThreshold::Relative, SharpnessThreshold::PerPixel}) {
        EXPECT_EQ(sharpness(ImageBuf(8, 12, 3, 0.6f), mode), 1.0 / 96.0);
        EXPECT_EQ(sharpness(ImageBuf(7, 5, 1, 0.0f), mode), 0.0);
    }
}

TEST(Sharpness, MatchesNaiveSpectrumCount) {
    Rng rng(8);
    const ImageBuf img = synth::random_image(9, 11, 3, rng);
    const std::vector<double> y = oracle::luma(img);
    const auto bins = oracle::dft(y, 9, 11);
    double peak = 0.0;
    for (const auto& z : bins) peak = std::max(peak, std::abs(z));
    for (auto [mode, div] : {std::pair{SharpnessThreshold::Relative, 1000.0},
                             std::pair{SharpnessThreshold::PerPixel, 1000.0 * 99.0}}) {
        const double thres = peak / div;
        const auto above = std::ranges::count_if(bins, [&](const auto& z) { return std::abs(z) > thres; });
        EXPECT_DOUBLE_EQ(sharpness(img, mode), static_cast<double>(above) / 99.0);
    }
}

TEST(Sharpness, BlurOrderingAndScaleInvariance) {
    for (int kind = 0; kind < 4; ++kind) {
        const ImageBuf img = synth::natural_image(64, 64, 3, kind, 40 + kind);
        double prev = sharpness(img);
        for (double sigma : {1.0, 2.0, 4.0}) {
            const double s = sharpness(gaussian_blur(img, sigma));
            EXPECT_LT(s, prev) << "kind " << kind << " sigma " << sigma;
            prev = s;
        }
        Tensor<double> scaled = tensor_cast<double>(static_cast<const Tensor<float>&>(img));
        Tensor<double> half = scaled;
        for (double& v : half.values()) v *= 0.5;
        EXPECT_EQ(sharpness(scaled), sharpness(half));
    }
}

TEST(Sharpness, PerPixelThresholdSaturatesOnNaturalImages) {
    for (int kind = 0; kind < 4; ++kind) {
        const ImageBuf img = synth::natural_image(64, 64, 3, kind, 40 + kind);
        const ImageBuf blurred = ImageBuf::from(gaussian_blur(img, 4.0));
        EXPECT_GE(sharpness(img, SharpnessThreshold::PerPixel), sharpness(img));
        EXPECT_GT(sharpness(blurred, SharpnessThreshold::PerPixel), 0.99);
    }
}
