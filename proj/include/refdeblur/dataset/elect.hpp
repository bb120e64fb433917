#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "refdeblur/metrics/sharpness.hpp"

namespace refdeblur {

enum class ElectionMode { MostBlurry, Intermediate, Sharpest };

inline std::optional<ElectionMode> parse_election_mode(std::string_view s) {
    if (s == "most_blurry") return ElectionMode::MostBlurry;
    if (s == "intermediate") return ElectionMode::Intermediate;
    if (s == "sharpest") return ElectionMode::Sharpest;
    return std::nullopt;
}

/// Sorts scores ascending (stable, so ties keep input order) and returns the
/// original index at the first, middle (floor(n/2)) or last sorted position.
inline std::size_t elect_from_scores(std::span<const double> scores, ElectionMode mode) {
    if (scores.empty()) throw ContractViolation("cannot elect a reference from an empty list");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    switch (mode) {
        case ElectionMode::MostBlurry: return order.front();
        case ElectionMode::Intermediate: return order[order.size() / 2];
        case ElectionMode::Sharpest: return order.back();
    }
    return order.back();
}

struct Election {
    std::size_t index = 0;
    double score = 0.0;
    std::vector<double> scores;
};

inline Election elect_reference(std::span<const ImageBuf> frames, ElectionMode mode) {
    if (frames.empty()) throw ContractViolation("cannot elect a reference from an empty list");
    Election e;
    for (const auto& f : frames) e.scores.push_back(sharpness(f));
    e.index = elect_from_scores(e.scores, mode);
    e.score = e.scores[e.index];
    return e;
}

}  // namespace refdeblur
