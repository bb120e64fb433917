#pragma once

#include <memory>
#include <optional>
#include <string>
#include <typeinfo>

#include "refdeblur/features/extractor.hpp"
#include "refdeblur/features/ref_encoder.hpp"
#include "refdeblur/fusion/fuse.hpp"
#include "refdeblur/fusion/warp.hpp"
#include "refdeblur/pipeline/backbone.hpp"

namespace refdeblur {

enum class MatchingSource {
    Intermediate,    ///< match the backbone's per-scale estimate (default)
    DownscaledBlur,  ///< ablation: match the downscaled blurry input
};

struct PipelineConfig {
    std::size_t K = 3;
    std::size_t L = 16;
    std::size_t C = 16;
    std::shared_ptr<const WeightBundle> weights;
    MatchingSource matching_source = MatchingSource::Intermediate;
    Extractor extractor = FixedBank{};
    unsigned threads = 0;

    void validate() const {
        if (K < 1 || L < 1 || C < 1) throw ContractViolation("pipeline needs K, L, C >= 1");
        if (!weights) throw WeightError("pipeline config has no weight bundle");
    }
};

/// Everything produced at one scale k.
struct ScaleTrace {
    std::size_t k = 0;
    ImageBuf inter;     ///< backbone estimate before fusion (matching query by default)
    ImageBuf output;    ///< estimate decoded from the fused features
    MatchResult match;
    FeatureMap blur_features;
    FeatureMap trans_features;
    FeatureMap fused_features;
    std::uint64_t ops_performed = 0;
};

/// Per-scale artifacts ordered coarse (k = K) to fine (k = 1).
struct EnrichmentTrace {
    std::vector<ScaleTrace> scales;

    [[nodiscard]] const ImageBuf& output() const { return scales.back().output; }
};

namespace detail {

/// Rethrows the in-flight library error with a "scale k:" prefix, keeping its type.
[[noreturn]] inline void rethrow_at_scale(std::size_t k) {
    const std::string tag = "scale " + std::to_string(k) + ": ";
    try {
        throw;
    } catch (const DegenerateSizeError& e) {
        throw DegenerateSizeError(tag + e.what());
    } catch (const ContractViolation& e) {
        throw ContractViolation(tag + e.what());
    } catch (const WeightError& e) {
        throw WeightError(tag + e.what());
    } catch (const LoadError& e) {
        throw LoadError(tag + e.what());
    } catch (const Error& e) {
        throw Error(e.code(), tag + e.what());
    }
}

}  // namespace detail

/// Coarse-to-fine reference-guided enrichment around the toy backbone.
inline EnrichmentTrace enrich(const ImageBuf& blur, const ImageBuf& ref, const PipelineConfig& cfg) {
    cfg.validate();
    if (!blur.same_shape(ref)) {
        throw ContractViolation("blur " + blur.shape_string() + " and reference " + ref.shape_string() + " differ");
    }
    const auto& w = *cfg.weights;
    const auto backbone = Backbone<float>::from_bundle(w);
    const auto encoder = RefEncoder<float>::from_bundle(w);
    const auto fusion = FusionWeights<float>::from_bundle(w);
    if (backbone.channels() != cfg.C || encoder.channels() != cfg.C || fusion.channels() != cfg.C) {
        throw WeightError("weights have C = " + std::to_string(backbone.channels()) + "/" +
                          std::to_string(encoder.channels()) + "/" + std::to_string(fusion.channels()) +
                          " (backbone/ref/fusion), config expects " + std::to_string(cfg.C));
    }

    const ImagePyramid blur_pyr = build_pyramid(blur, cfg.K);
    const ImagePyramid ref_pyr = build_pyramid(ref, cfg.K);
    const MatchOptions mopt{cfg.threads};

    EnrichmentTrace trace;
    trace.scales.reserve(cfg.K);  // coarser_match points into this vector
    std::optional<FeatureMap> carry;
    const MatchResult* coarser_match = nullptr;
    for (std::size_t k = cfg.K; k >= 1; --k) {
        try {
            const ImageBuf& blur_k = blur_pyr.level(k);
            const ImageBuf& ref_k = ref_pyr.level(k);
            ScaleTrace st;
            st.k = k;
            st.blur_features = backbone.features(blur_k, carry ? &*carry : nullptr);
            st.inter = ImageBuf::from(backbone.decode(blur_k, st.blur_features));

            const ImageBuf& query_img = cfg.matching_source == MatchingSource::Intermediate ? st.inter : blur_k;
            const FeatureMap fq = extract_features(query_img, cfg.extractor);
            const FeatureMap fr = extract_features(ref_k, cfg.extractor);
            st.match = coarser_match == nullptr ? match_global(fq, fr, mopt)
                                                : match_guided(fq, fr, *coarser_match, cfg.L, mopt);
            st.ops_performed = st.match.ops_performed;

            const FeatureMap ref_features = encoder.encode(ref_k);
            st.trans_features = warp_features(ref_features, st.match);
            st.fused_features = fuse(st.blur_features, st.trans_features, st.match.confidence, fusion);
            st.output = ImageBuf::from(backbone.decode(blur_k, st.fused_features));
            carry = st.fused_features;
            trace.scales.push_back(std::move(st));
            coarser_match = &trace.scales.back().match;
        } catch (const Error&) {
            detail::rethrow_at_scale(k);
        }
    }
    return trace;
}

}  // namespace refdeblur
