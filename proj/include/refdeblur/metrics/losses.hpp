#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "refdeblur/core/tensor.hpp"
#include "refdeblur/metrics/dft.hpp"

namespace refdeblur {

enum class CharbonnierForm {
    PerPixel,  ///< mean over pixel-channels of sqrt(d^2 + eps^2)
    Strict,    ///< sqrt(||d||_2 + eps^2) per level, norm unsquared
};

enum class FrequencyForm {
    RealImag,  ///< L1 over real and imaginary parts, averaged over 2 N C entries
    Modulus,   ///< mean complex modulus over N C bins
};

struct LossConfig {
    double alpha = 1.0;
    double beta = 0.01;
    double epsilon = 1e-3;
    CharbonnierForm charbonnier_form = CharbonnierForm::PerPixel;
    FrequencyForm frequency_form = FrequencyForm::RealImag;

    void validate() const {
        if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ContractViolation("loss weights must be >= 0");
        if (!(epsilon > 0.0)) throw ContractViolation("Charbonnier epsilon must be > 0");
    }
};

namespace detail {

template <class G>
void check_aligned(const std::vector<G>& truth, const std::vector<G>& est) {
    if (truth.size() != est.size() || truth.empty()) {
        throw ContractViolation("loss pyramids have " + std::to_string(truth.size()) + " and " +
                                std::to_string(est.size()) + " levels");
    }
    for (std::size_t k = 0; k < truth.size(); ++k)
        if (!truth[k].same_shape(est[k])) {
            throw ContractViolation("level " + std::to_string(k + 1) + ": " + truth[k].shape_string() + " vs " +
                                    est[k].shape_string());
        }
}

/// Per-channel spectra of est - truth.
template <class G>
std::vector<Spectrum> diff_spectra(const G& truth, const G& est) {
    std::vector<Spectrum> out;
    std::vector<double> d(truth.pixels());
    for (std::size_t c = 0; c < truth.channels(); ++c) {
        auto t = truth.plane(c);
        auto e = est.plane(c);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = static_cast<double>(e[i]) - static_cast<double>(t[i]);
        out.push_back(dft2(d, truth.height(), truth.width()));
    }
    return out;
}

inline double sgn(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace detail

/// Sum over levels of the Charbonnier penalty between truth and estimate.
template <class G>
double charbonnier(const std::vector<G>& truth, const std::vector<G>& est, double eps,
                   CharbonnierForm form = CharbonnierForm::PerPixel) {
    detail::check_aligned(truth, est);
    double total = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        auto t = truth[k].values();
        auto e = est[k].values();
        if (form == CharbonnierForm::PerPixel) {
            // sqrt(d^2 + eps^2) - eps, written so d = 0 contributes exactly 0.
            double excess = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double d = static_cast<double>(e[i]) - static_cast<double>(t[i]);
                excess += d * d / (std::sqrt(d * d + eps * eps) + eps);
            }
            total += eps + excess / static_cast<double>(t.size());
        } else {
            double ss = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double d = static_cast<double>(e[i]) - static_cast<double>(t[i]);
                ss += d * d;
            }
            total += std::sqrt(std::sqrt(ss) + eps * eps);
        }
    }
    return total;
}

/// Sum over levels of the L1 spectral discrepancy (unnormalized DFT, entry-averaged).
template <class G>
double frequency_loss(const std::vector<G>& truth, const std::vector<G>& est,
                      FrequencyForm form = FrequencyForm::RealImag) {
    detail::check_aligned(truth, est);
    double total = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        double acc = 0.0;
        for (const Spectrum& s : detail::diff_spectra(truth[k], est[k]))
            for (const Complex& z : s.bins)
                acc += form == FrequencyForm::RealImag ? std::abs(z.real()) + std::abs(z.imag()) : std::abs(z);
        const double entries = static_cast<double>(truth[k].size()) * (form == FrequencyForm::RealImag ? 2.0 : 1.0);
        total += acc / entries;
    }
    return total;
}

template <class G>
double total_loss(const std::vector<G>& truth, const std::vector<G>& est, const LossConfig& cfg = {}) {
    cfg.validate();
    const double cb = charbonnier(truth, est, cfg.epsilon, cfg.charbonnier_form);
    const double fr = cfg.beta == 0.0 ? 0.0 : frequency_loss(truth, est, cfg.frequency_form);
    return cfg.alpha * cb + cfg.beta * fr;
}

/// d(charbonnier)/d(est), one tensor per level.
template <class G>
std::vector<Tensor<double>> charbonnier_backward(const std::vector<G>& truth, const std::vector<G>& est, double eps,
                                                 CharbonnierForm form = CharbonnierForm::PerPixel) {
    detail::check_aligned(truth, est);
    std::vector<Tensor<double>> grads;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        Tensor<double> g(truth[k].height(), truth[k].width(), truth[k].channels());
        auto t = truth[k].values();
        auto e = est[k].values();
        auto gv = g.values();
        const double n = static_cast<double>(t.size());
        if (form == CharbonnierForm::PerPixel) {
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double d = static_cast<double>(e[i]) - static_cast<double>(t[i]);
                gv[i] = d / (n * std::sqrt(d * d + eps * eps));
            }
        } else {
            double ss = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i) {
                const double d = static_cast<double>(e[i]) - static_cast<double>(t[i]);
                ss += d * d;
            }
            const double norm = std::sqrt(ss);
            if (norm > 0.0) {
                const double scale = 1.0 / (2.0 * std::sqrt(norm + eps * eps) * norm);
                for (std::size_t i = 0; i < t.size(); ++i)
                    gv[i] = scale * (static_cast<double>(e[i]) - static_cast<double>(t[i]));
            }
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

/// d(frequency_loss)/d(est), one tensor per level. Uses sign(0) = 0 at kinks.
template <class G>
std::vector<Tensor<double>> frequency_backward(const std::vector<G>& truth, const std::vector<G>& est,
                                               FrequencyForm form = FrequencyForm::RealImag) {
    detail::check_aligned(truth, est);
    std::vector<Tensor<double>> grads;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        Tensor<double> g(truth[k].height(), truth[k].width(), truth[k].channels());
        const double entries = static_cast<double>(truth[k].size()) * (form == FrequencyForm::RealImag ? 2.0 : 1.0);
        const auto spectra = detail::diff_spectra(truth[k], est[k]);
        for (std::size_t c = 0; c < spectra.size(); ++c) {
            Spectrum dir = spectra[c];
            for (Complex& z : dir.bins) {
                if (form == FrequencyForm::RealImag) {
                    z = Complex(detail::sgn(z.real()), detail::sgn(z.imag()));
                } else {
                    const double m = std::abs(z);
                    z = m > 0.0 ? z / m : Complex(0.0, 0.0);
                }
            }
            const auto back = idft2_real(dir);
            auto plane = g.plane(c);
            for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = back[i] / entries;
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

/// Exact gradient of total_loss with respect to every estimate pixel.
template <class G>
std::vector<Tensor<double>> loss_backward(const std::vector<G>& truth, const std::vector<G>& est,
                                          const LossConfig& cfg = {}) {
    cfg.validate();
    auto grads = charbonnier_backward(truth, est, cfg.epsilon, cfg.charbonnier_form);
    for (auto& g : grads)
        for (double& v : g.values()) v *= cfg.alpha;
    if (cfg.beta != 0.0) {
        const auto fg = frequency_backward(truth, est, cfg.frequency_form);
        for (std::size_t k = 0; k < grads.size(); ++k) {
            auto a = grads[k].values();
            auto b = fg[k].values();
            for (std::size_t i = 0; i < a.size(); ++i) a[i] += cfg.beta * b[i];
        }
    }
    return grads;
}

}  // namespace refdeblur
