#pragma once

#include <algorithm>
#include <chrono>
#include <vector>

#include "refdeblur/core/random.hpp"
#include "refdeblur/matcher/match.hpp"

namespace refdeblur {

struct BenchConfig {
    std::size_t height = 128;
    std::size_t width = 128;
    std::size_t channels = 6;
    std::size_t K = 3;
    std::size_t L = 16;
    std::size_t trials = 5;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct BenchReport {
    BenchConfig config;
    std::size_t levels_used = 0;    ///< K after clamping to what the grid supports
    std::uint64_t global_ops = 0;   ///< finest level, exhaustive
    std::uint64_t guided_ops = 0;   ///< finest level, guided by the coarser levels
    std::uint64_t guided_total_ops = 0;  ///< all levels of the coarse-to-fine route
    double ops_ratio = 0.0;         ///< global_ops / guided_ops
    double global_ms = 0.0;         ///< median over trials
    double guided_ms = 0.0;         ///< median over trials, whole coarse-to-fine route
    bool window_covers_grid = false;
    bool index_maps_equal = false;
    bool confidence_equal = false;
};

/// Uniform [-1, 1] features.
inline FeatureMap random_features(std::size_t h, std::size_t w, std::size_t c, Rng& rng) {
    FeatureMap f(h, w, c);
    for (float& v : f.values()) v = static_cast<float>(uniform(rng, -1.0, 1.0));
    return f;
}

/// Runs exhaustive and guided matching on seeded random features and reports
/// exact similarity counts and timings. Throws if the window covers the
/// reference grid but the two routes disagree.
inline BenchReport bench_match(const BenchConfig& cfg) {
    if (cfg.height == 0 || cfg.width == 0 || cfg.channels == 0 || cfg.K == 0 || cfg.L == 0 || cfg.trials == 0) {
        throw ContractViolation("bench dimensions, K, L and trials must be >= 1");
    }
    Rng rng(cfg.seed);
    const FeatureMap query = random_features(cfg.height, cfg.width, cfg.channels, rng);
    const FeatureMap ref = random_features(cfg.height, cfg.width, cfg.channels, rng);

    std::size_t K = 1;
    for (std::size_t h = cfg.height, w = cfg.width; K < cfg.K && (h > 1 || w > 1); ++K) {
        h = (h + 1) / 2;
        w = (w + 1) / 2;
    }
    const auto qp = downscale_chain(query, K);
    const auto rp = downscale_chain(ref, K);

    BenchReport rep;
    rep.config = cfg;
    rep.levels_used = K;
    const MatchOptions opt{cfg.threads};
    using clock = std::chrono::steady_clock;
    std::vector<double> tg, tl;
    MatchResult global;
    std::vector<MatchResult> guided;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        auto t0 = clock::now();
        global = match_global(query, ref, opt);
        auto t1 = clock::now();
        guided = match_multiscale(qp, rp, cfg.L, opt);
        auto t2 = clock::now();
        tg.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        tl.push_back(std::chrono::duration<double, std::milli>(t2 - t1).count());
    }
    auto median = [](std::vector<double> v) {
        std::ranges::sort(v);
        return v[v.size() / 2];
    };
    rep.global_ms = median(tg);
    rep.guided_ms = median(tl);
    rep.global_ops = global.ops_performed;
    rep.guided_ops = guided.front().ops_performed;
    for (const auto& m : guided) rep.guided_total_ops += m.ops_performed;
    rep.ops_ratio = static_cast<double>(rep.global_ops) / static_cast<double>(rep.guided_ops);
    rep.index_maps_equal = global.index == guided.front().index;
    rep.confidence_equal = global.confidence == guided.front().confidence;
    rep.window_covers_grid = K == 1 || cfg.L >= 2 * std::max(cfg.height, cfg.width);
    if (rep.window_covers_grid && !(rep.index_maps_equal && rep.confidence_equal)) {
        throw Error("bench_mismatch", "guided matching diverged from global matching although the window covers the grid");
    }
    return rep;
}

}  // namespace refdeblur
