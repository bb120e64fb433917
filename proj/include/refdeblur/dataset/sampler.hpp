#pragma once

#include <algorithm>
#include <cstddef>
#include <string>

#include "refdeblur/core/random.hpp"
#include "refdeblur/dataset/scene.hpp"

namespace refdeblur {

enum class RefKind { Sharp, Blurry };

inline const char* to_string(RefKind k) noexcept { return k == RefKind::Sharp ? "sharp" : "blurry"; }

struct SamplingPolicy {
    std::ptrdiff_t window = 30;  ///< offsets drawn from [-window, window], clamped to the sequence
    double sharp_ratio = 0.8;    ///< probability the reference is a sharp frame
};

struct RefChoice {
    std::size_t frame = 0;
    std::ptrdiff_t offset = 0;
    RefKind kind = RefKind::Sharp;
};

/// Draws the reference frame for target t: offset uniform over the clamped
/// window (offset 0 allowed), then sharp with probability sharp_ratio.
inline RefChoice draw_reference(std::size_t frames, std::size_t t, Rng& rng, const SamplingPolicy& policy = {}) {
    if (frames == 0) throw ContractViolation("cannot sample from an empty scene");
    if (t >= frames) throw ContractViolation("target frame " + std::to_string(t) + " outside a " +
                                             std::to_string(frames) + "-frame scene");
    if (!(policy.sharp_ratio >= 0.0 && policy.sharp_ratio <= 1.0)) {
        throw ContractViolation("sharp_ratio must lie in [0, 1]");
    }
    if (policy.window < 0) throw ContractViolation("reference window must be >= 0");
    const auto ti = static_cast<std::ptrdiff_t>(t);
    const std::ptrdiff_t lo = std::max(-policy.window, -ti);
    const std::ptrdiff_t hi = std::min(policy.window, static_cast<std::ptrdiff_t>(frames) - 1 - ti);
    RefChoice c;
    c.offset = static_cast<std::ptrdiff_t>(uniform_int(rng, lo, hi));
    c.frame = static_cast<std::size_t>(ti + c.offset);
    c.kind = bernoulli(rng, policy.sharp_ratio) ? RefKind::Sharp : RefKind::Blurry;
    return c;
}

struct SamplePair {
    ImageBuf blur;
    ImageBuf ref;
    RefKind ref_kind = RefKind::Sharp;
    std::ptrdiff_t ref_offset = 0;
    std::filesystem::path ref_path;
};

/// Draws a reference for frame t of `scene` and loads both images. Sharp
/// references are ground-truth frames, blurry references are input frames.
inline SamplePair sample_reference(const SceneIndex& scene, std::size_t t, Rng& rng, double sharp_ratio = 0.8) {
    const RefChoice c = draw_reference(scene.size(), t, rng, {30, sharp_ratio});
    SamplePair p;
    p.ref_kind = c.kind;
    p.ref_offset = c.offset;
    p.ref_path = c.kind == RefKind::Sharp ? scene.frames[c.frame].sharp : scene.frames[c.frame].blur;
    p.blur = io::load_image(scene.frames[t].blur);
    p.ref = io::load_image(p.ref_path);
    return p;
}

}  // namespace refdeblur
