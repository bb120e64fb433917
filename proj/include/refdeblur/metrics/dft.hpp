#pragma once

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

#include "refdeblur/errors.hpp"

namespace refdeblur {

using Complex = std::complex<double>;

/// 2-D spectrum, bins row-major: bin (u, v) at v * width + u.
struct Spectrum {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<Complex> bins;

    [[nodiscard]] Complex& operator()(std::size_t u, std::size_t v) { return bins[v * width + u]; }
    [[nodiscard]] const Complex& operator()(std::size_t u, std::size_t v) const { return bins[v * width + u]; }
};

namespace detail {

/// FFTW's planner is not thread-safe; execution is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

inline void fftw_2d(std::vector<Complex>& in, std::vector<Complex>& out, std::size_t h, std::size_t w, int sign) {
    auto* pin = reinterpret_cast<fftw_complex*>(in.data());
    auto* pout = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), pin, pout, sign, FFTW_ESTIMATE);
    }
    if (plan == nullptr) throw Error("fft_error", "FFTW failed to plan a " + std::to_string(h) + "x" + std::to_string(w) + " transform");
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

}  // namespace detail

/// Unnormalized forward DFT: X(u,v) = sum_{x,y} f(x,y) exp(-2 pi i (u x / W + v y / H)).
inline Spectrum dft2(std::span<const double> plane, std::size_t height, std::size_t width) {
    if (plane.size() != height * width || plane.empty()) {
        throw ContractViolation("dft2 plane size does not match " + std::to_string(height) + "x" + std::to_string(width));
    }
    std::vector<Complex> in(plane.begin(), plane.end());
    Spectrum s{height, width, std::vector<Complex>(plane.size())};
    detail::fftw_2d(in, s.bins, height, width, FFTW_FORWARD);
    return s;
}

/// Real part of the unnormalized inverse DFT (exp(+2 pi i ...), no 1/N).
inline std::vector<double> idft2_real(const Spectrum& s) {
    std::vector<Complex> in = s.bins;
    std::vector<Complex> out(in.size());
    detail::fftw_2d(in, out, s.height, s.width, FFTW_BACKWARD);
    std::vector<double> re(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) re[i] = out[i].real();
    return re;
}

/// Moves the zero-frequency bin to (floor(W/2), floor(H/2)) by quadrant swap.
inline Spectrum fftshift(const Spectrum& s) {
    Spectrum out{s.height, s.width, std::vector<Complex>(s.bins.size())};
    const std::size_t sy = s.height / 2, sx = s.width / 2;
    for (std::size_t v = 0; v < s.height; ++v)
        for (std::size_t u = 0; u < s.width; ++u) out((u + sx) % s.width, (v + sy) % s.height) = s(u, v);
    return out;
}

}  // namespace refdeblur
