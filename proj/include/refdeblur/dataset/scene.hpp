#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "refdeblur/io/image_io.hpp"

namespace refdeblur {

struct FramePair {
    std::filesystem::path blur;
    std::filesystem::path sharp;
};

/// One scene laid out as <root>/<scene>/blur/* and <root>/<scene>/sharp/*,
/// paired by sorted position.
struct SceneIndex {
    std::string id;
    std::vector<FramePair> frames;

    [[nodiscard]] std::size_t size() const noexcept { return frames.size(); }
};

namespace detail {

/// Last run of digits in the file stem, if any.
inline std::optional<unsigned long long> frame_number(const std::filesystem::path& p) {
    const std::string stem = p.stem().string();
    auto end = stem.size();
    while (end > 0 && !std::isdigit(static_cast<unsigned char>(stem[end - 1]))) --end;
    if (end == 0) return std::nullopt;
    auto begin = end;
    while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
    try {
        return std::stoull(stem.substr(begin, end - begin));
    } catch (const std::out_of_range&) {
        return std::nullopt;
    }
}

/// Frames ordered by embedded number, then by filename.
inline std::vector<std::filesystem::path> sorted_frames(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && io::is_image_file(e.path())) files.push_back(e.path());
    std::ranges::sort(files, [](const auto& a, const auto& b) {
        const auto na = frame_number(a), nb = frame_number(b);
        if (na != nb) {
            if (!na) return false;  // unnumbered frames last
            if (!nb) return true;
            return *na < *nb;
        }
        return a.filename().string() < b.filename().string();
    });
    return files;
}

}  // namespace detail

/// Scans <root>/<scene>/{blur,sharp}. Scenes come back sorted by name.
inline std::vector<SceneIndex> scan_dataset(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw IngestionError("dataset root " + root.string() + " is not a directory");
    std::vector<fs::path> scenes;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) scenes.push_back(e.path());
    if (scenes.empty()) throw IngestionError("dataset root " + root.string() + " has no scenes");
    std::ranges::sort(scenes);

    std::vector<SceneIndex> out;
    for (const auto& dir : scenes) {
        const std::string id = dir.filename().string();
        if (!fs::is_directory(dir / "blur") || !fs::is_directory(dir / "sharp")) {
            throw IngestionError("scene '" + id + "' lacks blur/ or sharp/ subdirectory");
        }
        const auto blur = detail::sorted_frames(dir / "blur");
        const auto sharp = detail::sorted_frames(dir / "sharp");
        if (blur.size() != sharp.size()) {
            throw IngestionError("scene '" + id + "' has " + std::to_string(blur.size()) + " blurry but " +
                                 std::to_string(sharp.size()) + " sharp frames");
        }
        if (blur.empty()) throw IngestionError("scene '" + id + "' has no frames");
        SceneIndex s{id, {}};
        for (std::size_t i = 0; i < blur.size(); ++i) s.frames.push_back({blur[i], sharp[i]});
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace refdeblur
