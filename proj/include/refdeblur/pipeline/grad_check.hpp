#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "refdeblur/core/random.hpp"
#include "refdeblur/fusion/fuse.hpp"
#include "refdeblur/metrics/losses.hpp"

namespace refdeblur {

inline constexpr double kGradRelTolerance = 1e-4;

/// |a - n| / max(|a|, |n|, 1e-8). The floor only matters where both values
/// are roundoff-sized.
[[nodiscard]] inline double relative_error(double analytic, double numeric) noexcept {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    return std::abs(analytic - numeric) / denom;
}

struct GradCheckConfig {
    std::size_t size = 8;            ///< finest level is size x size
    std::size_t channels = 4;        ///< feature channels C
    std::size_t image_channels = 3;
    std::size_t levels = 3;          ///< loss pyramid depth
    LossConfig loss{};
    double step = 1e-3;              ///< central-difference step h
    bool zero_loss = false;          ///< truth == estimate

    void validate() const {
        if (size < 2 || size > 16 || channels < 1 || channels > 4) {
            throw ContractViolation("grad check instance must be 2..16 pixels and 1..4 channels");
        }
        if (image_channels != 1 && image_channels != 3) throw ContractViolation("image channels must be 1 or 3");
        if (levels < 1 || ceil_half_pow(size, levels) < 1) throw ContractViolation("bad level count");
        if (!(step > 0.0)) throw ContractViolation("finite-difference step must be > 0");
        loss.validate();
    }

    static constexpr std::size_t ceil_half_pow(std::size_t n, std::size_t k) {
        for (std::size_t i = 1; i < k; ++i) n = (n + 1) / 2;
        return n;
    }
};

struct GradBlock {
    std::string name;
    std::size_t count = 0;
    double max_rel_err = 0.0;
    double max_abs_analytic = 0.0;
};

struct GradCheckReport {
    std::uint64_t seed = 0;
    GradCheckConfig config;
    std::vector<GradBlock> blocks;
    double max_rel_err = 0.0;
    std::size_t kink_crossings = 0;  ///< FD stencils that flipped a spectral sign
    bool passed = false;

    [[nodiscard]] const GradBlock* find(const std::string& name) const {
        for (const auto& b : blocks)
            if (b.name == name) return &b;
        return nullptr;
    }
};

namespace detail {

using TensorD = Tensor<double>;

struct GradInstance {
    TensorD blur_img;
    TensorD blur, trans, conf;
    FusionWeights<double> fusion;
    ConvLayer<double> head;
    std::vector<TensorD> truth;
    std::vector<TensorD> est_coarse;  // levels 2..K, fixed
};

inline TensorD uniform_tensor(std::size_t h, std::size_t w, std::size_t c, Rng& rng, double lo, double hi) {
    TensorD t(h, w, c);
    for (double& v : t.values()) v = uniform(rng, lo, hi);
    return t;
}

inline void normal_fill(std::vector<double>& v, Rng& rng, double sd) {
    for (double& x : v) x = sd * normal(rng);
}

/// Per-channel offset of +-0.2 plus a residual (|r| <= 0.1) whose spectrum has
/// every real/imaginary component at least ~1/8 of its peak: the estimate-truth
/// difference stays clear of both the Charbonnier core and the L1 spectral kinks.
inline TensorD make_difference(std::size_t h, std::size_t w, std::size_t c, Rng& rng) {
    TensorD d(h, w, c);
    const std::size_t n = h * w;
    auto pm = [&](double lo, double hi) { return (bernoulli(rng, 0.5) ? 1.0 : -1.0) * uniform(rng, lo, hi); };
    for (std::size_t ch = 0; ch < c; ++ch) {
        Spectrum s{h, w, std::vector<Complex>(n)};
        for (std::size_t v = 0; v < h; ++v)
            for (std::size_t u = 0; u < w; ++u) {
                const std::size_t b = v * w + u;
                const std::size_t p = ((h - v) % h) * w + (w - u) % w;
                if (p < b) {
                    s.bins[b] = std::conj(s.bins[p]);
                } else if (p == b) {
                    s.bins[b] = Complex(pm(1.0, 2.0), 0.0);
                } else {
                    s.bins[b] = Complex(pm(1.0, 2.0), pm(1.0, 2.0));
                }
            }
        auto r = idft2_real(s);
        double peak = 0.0;
        for (double& x : r) peak = std::max(peak, std::abs(x /= static_cast<double>(n)));
        const double scale = 0.1 / peak;
        const double offset = pm(0.2, 0.2);
        auto plane = d.plane(ch);
        for (std::size_t i = 0; i < n; ++i) plane[i] = offset + scale * r[i];
    }
    return d;
}

inline TensorD fused(const GradInstance& in) { return fuse(in.blur, in.trans, in.conf, in.fusion); }

inline TensorD decode_raw(const GradInstance& in, const TensorD& f) {
    TensorD out = conv2d(f, in.head);
    add_inplace(out, in.blur_img);
    return out;
}

inline std::vector<TensorD> estimate(const GradInstance& in) {
    TensorD e = decode_raw(in, fused(in));
    for (double& v : e.values()) v = std::clamp(v, 0.0, 1.0);
    std::vector<TensorD> est{std::move(e)};
    est.insert(est.end(), in.est_coarse.begin(), in.est_coarse.end());
    return est;
}

inline GradInstance make_instance(const GradCheckConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = cfg.size, C = cfg.channels, I = cfg.image_channels;
    GradInstance in;
    in.blur_img = uniform_tensor(n, n, I, rng, 0.45, 0.55);
    in.blur = uniform_tensor(n, n, C, rng, -1.0, 1.0);
    in.trans = uniform_tensor(n, n, C, rng, -1.0, 1.0);
    in.conf = uniform_tensor(n, n, 1, rng, -1.0, 1.0);
    in.fusion = FusionWeights<double>::zeros(C);
    normal_fill(in.fusion.conv1.weight, rng, 0.3);
    normal_fill(in.fusion.conv1.bias, rng, 0.3);
    normal_fill(in.fusion.conv2.weight, rng, 0.3);
    normal_fill(in.fusion.conv2.bias, rng, 0.3);
    in.head = ConvLayer<double>::zeros(I, C, 1, 1);
    normal_fill(in.head.weight, rng, 0.01);
    normal_fill(in.head.bias, rng, 0.01);

    for (std::size_t k = 2, s = n; k <= cfg.levels; ++k) {
        s = (s + 1) / 2;
        in.est_coarse.push_back(uniform_tensor(s, s, I, rng, 0.4, 0.6));
    }
    const auto est = estimate(in);
    const TensorD raw = decode_raw(in, fused(in));
    for (double v : raw.values())
        if (v <= 0.05 || v >= 0.95) throw Error("grad_check", "instance estimate too close to the clamp bounds");
    for (const auto& e : est) {
        TensorD t = e;
        if (!cfg.zero_loss) {
            const TensorD d = make_difference(e.height(), e.width(), e.channels(), rng);
            for (std::size_t i = 0; i < t.size(); ++i) t.values()[i] -= d.values()[i];
        }
        in.truth.push_back(std::move(t));
    }
    return in;
}

/// Signs of every real/imaginary spectral component of est - truth.
inline std::vector<signed char> spectral_signs(const std::vector<TensorD>& truth, const std::vector<TensorD>& est) {
    std::vector<signed char> s;
    for (std::size_t k = 0; k < truth.size(); ++k)
        for (const Spectrum& sp : diff_spectra(truth[k], est[k]))
            for (const Complex& z : sp.bins) {
                s.push_back(static_cast<signed char>(sgn(z.real())));
                s.push_back(static_cast<signed char>(sgn(z.imag())));
            }
    return s;
}

}  // namespace detail

/// Assembles fuse -> decode head -> total loss on a small seeded instance and
/// compares every analytic gradient block against central differences.
inline GradCheckReport grad_check(const GradCheckConfig& cfg, std::uint64_t seed) {
    using detail::TensorD;
    cfg.validate();
    detail::GradInstance inst = detail::make_instance(cfg, seed);
    const double h = cfg.step;
    const LossConfig& lc = cfg.loss;

    GradCheckReport rep;
    rep.seed = seed;
    rep.config = cfg;
    const bool track_kinks = lc.beta != 0.0;

    auto record = [&](const std::string& name, const std::vector<double>& analytic, const std::vector<double*>& params,
                      const std::function<double()>& f, const std::function<std::vector<TensorD>()>& est_of) {
        const auto base_signs = track_kinks ? detail::spectral_signs(inst.truth, est_of()) : std::vector<signed char>{};
        GradBlock blk{name, params.size(), 0.0, 0.0};
        for (std::size_t i = 0; i < params.size(); ++i) {
            double& p = *params[i];
            const double saved = p;
            p = saved + h;
            const double up = f();
            const bool flip_up = track_kinks && detail::spectral_signs(inst.truth, est_of()) != base_signs;
            p = saved - h;
            const double down = f();
            const bool flip_down = track_kinks && detail::spectral_signs(inst.truth, est_of()) != base_signs;
            p = saved;
            if (flip_up || flip_down) ++rep.kink_crossings;
            const double numeric = (up - down) / (2.0 * h);
            blk.max_rel_err = std::max(blk.max_rel_err, relative_error(analytic[i], numeric));
            blk.max_abs_analytic = std::max(blk.max_abs_analytic, std::abs(analytic[i]));
        }
        rep.blocks.push_back(blk);
    };

    // Gradients with respect to the estimate pyramid itself.
    std::vector<TensorD> est = detail::estimate(inst);
    std::vector<double*> est_params;
    for (auto& e : est)
        for (double& v : e.values()) est_params.push_back(&v);
    auto flatten = [](const std::vector<TensorD>& g) {
        std::vector<double> out;
        for (const auto& t : g) out.insert(out.end(), t.values().begin(), t.values().end());
        return out;
    };
    auto est_view = [&] { return est; };

    record("estimate", flatten(loss_backward(inst.truth, est, lc)), est_params,
           [&] { return total_loss(inst.truth, est, lc); }, est_view);
    {
        auto g = charbonnier_backward(inst.truth, est, lc.epsilon, lc.charbonnier_form);
        for (auto& t : g)
            for (double& v : t.values()) v *= lc.alpha;
        record("charbonnier", flatten(g), est_params,
               [&] { return lc.alpha * charbonnier(inst.truth, est, lc.epsilon, lc.charbonnier_form); }, est_view);
    }
    if (lc.beta != 0.0) {
        auto g = frequency_backward(inst.truth, est, lc.frequency_form);
        for (auto& t : g)
            for (double& v : t.values()) v *= lc.beta;
        record("frequency", flatten(g), est_params,
               [&] { return lc.beta * frequency_loss(inst.truth, est, lc.frequency_form); }, est_view);
    }

    // Chain: parameters -> fuse -> head -> estimate level 1 -> loss.
    const TensorD fused = detail::fused(inst);
    const auto est_grad = loss_backward(inst.truth, est, lc);
    const TensorD d_fused = conv2d_backward(fused, inst.head, est_grad.front()).input;
    const FuseGrads<double> fg = fuse_backward(d_fused, inst.blur, inst.trans, inst.conf, inst.fusion);

    auto chain_loss = [&] { return total_loss(inst.truth, detail::estimate(inst), lc); };
    auto chain_est = [&] { return detail::estimate(inst); };
    auto ptrs = [](std::vector<double>& v) {
        std::vector<double*> p;
        for (double& x : v) p.push_back(&x);
        return p;
    };
    auto tensor_ptrs = [](TensorD& t) {
        std::vector<double*> p;
        for (double& x : t.values()) p.push_back(&x);
        return p;
    };
    record("fusion.conv1.w", fg.conv1.weight, ptrs(inst.fusion.conv1.weight), chain_loss, chain_est);
    record("fusion.conv1.b", fg.conv1.bias, ptrs(inst.fusion.conv1.bias), chain_loss, chain_est);
    record("fusion.conv2.w", fg.conv2.weight, ptrs(inst.fusion.conv2.weight), chain_loss, chain_est);
    record("fusion.conv2.b", fg.conv2.bias, ptrs(inst.fusion.conv2.bias), chain_loss, chain_est);
    auto values = [](const TensorD& t) { return std::vector<double>(t.values().begin(), t.values().end()); };
    record("F_blur", values(fg.blur), tensor_ptrs(inst.blur), chain_loss, chain_est);
    record("F_trans", values(fg.trans), tensor_ptrs(inst.trans), chain_loss, chain_est);
    record("S", values(fg.conf), tensor_ptrs(inst.conf), chain_loss, chain_est);

    for (const auto& b : rep.blocks) rep.max_rel_err = std::max(rep.max_rel_err, b.max_rel_err);
    rep.passed = rep.max_rel_err < kGradRelTolerance;
    return rep;
}

}  // namespace refdeblur
