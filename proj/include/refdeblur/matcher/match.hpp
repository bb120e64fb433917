#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "refdeblur/core/parallel.hpp"
#include "refdeblur/core/pyramid.hpp"
#include "refdeblur/matcher/patch.hpp"

namespace refdeblur {

/// Nearest-neighbour field from a query grid into a reference grid.
struct MatchResult {
    IndexMap index;          // H x W, linear indices into the reference grid
    FeatureMap confidence;   // H x W x 1, best cosine similarity in [-1, 1]
    std::size_t ref_height = 0;
    std::size_t ref_width = 0;
    std::uint64_t ops_performed = 0;  // similarity evaluations

    [[nodiscard]] std::size_t height() const noexcept { return index.height(); }
    [[nodiscard]] std::size_t width() const noexcept { return index.width(); }
    [[nodiscard]] GridIndexing ref_grid() const noexcept { return {ref_width}; }
};

struct MatchOptions {
    unsigned threads = 0;  // 0: hardware concurrency
};

namespace detail {

inline constexpr std::size_t kRefTile = 256;

inline void check_match_inputs(const FeatureMap& q, const FeatureMap& r) {
    if (q.channels() != r.channels()) {
        throw ContractViolation("matching " + q.shape_string() + " against " + r.shape_string() +
                                ": channel counts differ");
    }
    if (q.empty() || r.empty()) throw ContractViolation("matching on an empty feature map");
}

/// Reference patches regrouped into tiles of kRefTile patches, each tile stored
/// dimension-major so the inner loop runs across candidates. Per-candidate dot
/// products still accumulate over dimensions in ascending order, exactly as
/// cosine_sim does.
struct TiledRefs {
    std::size_t count = 0, dim = 0, tiles = 0;
    std::vector<double> data;  // tiles x dim x kRefTile

    explicit TiledRefs(const PatchMatrix& m) : count(m.count), dim(m.dim), tiles((m.count + kRefTile - 1) / kRefTile) {
        data.assign(tiles * dim * kRefTile, 0.0);
        for (std::size_t j = 0; j < count; ++j) {
            const std::size_t t = j / kRefTile, lane = j % kRefTile;
            const double* src = m.rows.data() + j * dim;
            for (std::size_t d = 0; d < dim; ++d) data[(t * dim + d) * kRefTile + lane] = src[d];
        }
    }
};

}  // namespace detail

/// Exhaustive matching: each query patch against every reference patch.
/// Ties resolve to the smallest reference index.
inline MatchResult match_global(const FeatureMap& query, const FeatureMap& ref, MatchOptions opt = {}) {
    detail::check_match_inputs(query, ref);
    const PatchMatrix qp = extract_patches(query);
    const PatchMatrix rp = extract_patches(ref);
    const detail::TiledRefs tiled(rp);
    const std::size_t nq = qp.count, nr = rp.count, dim = qp.dim;

    std::vector<double> best(nq, -std::numeric_limits<double>::infinity());
    std::vector<std::uint32_t> best_idx(nq, 0);

    // Register blocking: kBlock queries x kLanes candidates per accumulator set.
    constexpr std::size_t kBlock = 4, kLanes = 8;
    parallel_chunks(nq, opt.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        alignas(64) double acc[kBlock][detail::kRefTile];
        for (std::size_t t = 0; t < tiled.tiles; ++t) {
            const std::size_t j0 = t * detail::kRefTile;
            const std::size_t lanes = std::min(detail::kRefTile, nr - j0);
            const double* tile = tiled.data.data() + t * dim * detail::kRefTile;
            for (std::size_t i0 = begin; i0 < end; i0 += kBlock) {
                const std::size_t nb = std::min(kBlock, end - i0);
                const double* p[kBlock];
                for (std::size_t b = 0; b < kBlock; ++b) p[b] = qp.rows.data() + (i0 + std::min(b, nb - 1)) * dim;
                for (std::size_t l0 = 0; l0 < detail::kRefTile; l0 += kLanes) {
                    double a[kBlock][kLanes] = {};
                    for (std::size_t d = 0; d < dim; ++d) {
                        const double* col = tile + d * detail::kRefTile + l0;
                        for (std::size_t b = 0; b < kBlock; ++b)
                            for (std::size_t l = 0; l < kLanes; ++l) a[b][l] += p[b][d] * col[l];
                    }
                    for (std::size_t b = 0; b < kBlock; ++b)
                        for (std::size_t l = 0; l < kLanes; ++l) acc[b][l0 + l] = a[b][l];
                }
                for (std::size_t b = 0; b < nb; ++b) {
                    const std::size_t i = i0 + b;
                    double best_s = best[i];
                    std::uint32_t bi = best_idx[i];
                    const double np = qp.norms[i];
                    for (std::size_t l = 0; l < lanes; ++l) {
                        const double s = cosine_from_dot(acc[b][l], np, rp.norms[j0 + l]);
                        if (s > best_s) {
                            best_s = s;
                            bi = static_cast<std::uint32_t>(j0 + l);
                        }
                    }
                    best[i] = best_s;
                    best_idx[i] = bi;
                }
            }
        }
    });

    MatchResult m;
    m.index = IndexMap(query.height(), query.width(), 1, std::move(best_idx));
    m.confidence = FeatureMap(query.height(), query.width(), 1);
    for (std::size_t i = 0; i < nq; ++i) m.confidence.values()[i] = static_cast<float>(best[i]);
    m.ref_height = ref.height();
    m.ref_width = ref.width();
    m.ops_performed = static_cast<std::uint64_t>(nq) * static_cast<std::uint64_t>(nr);
    return m;
}

/// Clamped search window (inclusive bounds) around a reference-grid centre.
struct SearchWindow {
    std::size_t x0, x1, y0, y1;

    [[nodiscard]] std::uint64_t area() const noexcept {
        return static_cast<std::uint64_t>(x1 - x0 + 1) * static_cast<std::uint64_t>(y1 - y0 + 1);
    }
    [[nodiscard]] bool contains(std::size_t x, std::size_t y) const noexcept {
        return x >= x0 && x <= x1 && y >= y0 && y <= y1;
    }
};

/// Side-L window whose top-left is centre - floor(L/2), intersected with a
/// ref_w x ref_h grid. The centre itself is first clamped into the grid.
[[nodiscard]] inline SearchWindow guided_window(std::size_t cx, std::size_t cy, std::size_t L, std::size_t ref_w,
                                                std::size_t ref_h) noexcept {
    cx = std::min(cx, ref_w - 1);
    cy = std::min(cy, ref_h - 1);
    const auto lo = [L](std::size_t c) { return c >= L / 2 ? c - L / 2 : std::size_t{0}; };
    const auto hi = [L](std::size_t c, std::size_t n) {
        const std::size_t top = c + (L - L / 2) - 1;  // c - L/2 + L - 1 without underflow
        return std::min(top, n - 1);
    };
    return {lo(cx), hi(cx, ref_w), lo(cy), hi(cy, ref_h)};
}

/// Reference-grid centre that guides query pixel (x, y): twice the coarse
/// match of its parent (floor(x/2), floor(y/2)).
[[nodiscard]] inline std::pair<std::size_t, std::size_t> guide_center(const MatchResult& coarse, std::size_t x,
                                                                       std::size_t y) noexcept {
    const std::uint32_t parent = coarse.index(x / 2, y / 2);
    const GridIndexing g = coarse.ref_grid();
    return {2 * g.x_of(parent), 2 * g.y_of(parent)};
}

/// Local matching inside an L x L window centred on the upscaled coarse match.
inline MatchResult match_guided(const FeatureMap& query, const FeatureMap& ref, const MatchResult& coarse,
                                std::size_t L, MatchOptions opt = {}) {
    detail::check_match_inputs(query, ref);
    if (L < 1) throw ContractViolation("guide window side L must be >= 1");
    if (coarse.height() != (query.height() + 1) / 2 || coarse.width() != (query.width() + 1) / 2) {
        throw ContractViolation("coarse match " + std::to_string(coarse.height()) + "x" +
                                std::to_string(coarse.width()) + " is not the ceil-half of query " +
                                query.shape_string());
    }
    if (coarse.ref_width == 0 || coarse.ref_height == 0) throw ContractViolation("coarse match has no reference grid");

    const PatchMatrix qp = extract_patches(query);
    const PatchMatrix rp = extract_patches(ref);
    const std::size_t W = query.width(), dim = qp.dim;
    const std::size_t rw = ref.width(), rh = ref.height();

    std::vector<std::uint32_t> idx(qp.count, 0);
    std::vector<double> conf(qp.count, 0.0);
    const unsigned workers = std::max<unsigned>(1, resolve_threads(opt.threads));
    std::vector<std::uint64_t> ops(workers + 1, 0);

    parallel_chunks(qp.count, opt.threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        std::uint64_t local_ops = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t x = i % W, y = i / W;
            const auto [cx, cy] = guide_center(coarse, x, y);
            const SearchWindow win = guided_window(cx, cy, L, rw, rh);
            const double* p = qp.rows.data() + i * dim;
            const double np = qp.norms[i];
            double b = -std::numeric_limits<double>::infinity();
            std::uint32_t bi = 0;
            for (std::size_t ry = win.y0; ry <= win.y1; ++ry)
                for (std::size_t rx = win.x0; rx <= win.x1; ++rx) {
                    const std::size_t j = ry * rw + rx;
                    const double* q = rp.rows.data() + j * dim;
                    double dot = 0.0;
                    for (std::size_t d = 0; d < dim; ++d) dot += p[d] * q[d];
                    const double s = cosine_from_dot(dot, np, rp.norms[j]);
                    if (s > b) {
                        b = s;
                        bi = static_cast<std::uint32_t>(j);
                    }
                }
            local_ops += win.area();
            idx[i] = bi;
            conf[i] = b;
        }
        ops[chunk] = local_ops;
    });

    MatchResult m;
    m.index = IndexMap(query.height(), query.width(), 1, std::move(idx));
    m.confidence = FeatureMap(query.height(), query.width(), 1);
    for (std::size_t i = 0; i < qp.count; ++i) m.confidence.values()[i] = static_cast<float>(conf[i]);
    m.ref_height = rh;
    m.ref_width = rw;
    for (auto o : ops) m.ops_performed += o;
    return m;
}

/// Coarse-to-fine matching over level-aligned pyramids (levels[0] finest).
/// The coarsest level is matched globally, every finer level is guided by the
/// level above it. Results are returned finest first, like the pyramids.
inline std::vector<MatchResult> match_multiscale(const FeaturePyramid& query, const FeaturePyramid& ref,
                                                 std::size_t L, MatchOptions opt = {}) {
    if (query.depth() == 0 || query.depth() != ref.depth()) {
        throw ContractViolation("pyramids have " + std::to_string(query.depth()) + " and " +
                                std::to_string(ref.depth()) + " levels");
    }
    for (std::size_t k = 1; k < query.depth(); ++k) {
        const auto& fine = query.levels[k - 1];
        const auto& coarse = query.levels[k];
        if (coarse.height() != (fine.height() + 1) / 2 || coarse.width() != (fine.width() + 1) / 2) {
            throw ContractViolation("query pyramid level " + std::to_string(k + 1) + " is not a ceil-half of level " +
                                    std::to_string(k));
        }
    }
    const std::size_t K = query.depth();
    std::vector<MatchResult> out(K);
    out[K - 1] = match_global(query.levels[K - 1], ref.levels[K - 1], opt);
    for (std::size_t k = K - 1; k-- > 0;) out[k] = match_guided(query.levels[k], ref.levels[k], out[k + 1], L, opt);
    return out;
}

}  // namespace refdeblur
