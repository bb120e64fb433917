#pragma once

// RFM1: "RFM1", u32 H, W, C, then H*W*C f32, channel-planar row-major.
// RIM1: "RIM1", u32 H, W, then H*W u32 indices, row-major.
// All integers and floats little-endian.

#include <filesystem>

#include "refdeblur/core/tensor.hpp"
#include "refdeblur/io/binary.hpp"

namespace refdeblur::io {

inline std::vector<char> encode_rfm1(const FeatureMap& map) {
    ByteWriter w;
    w.bytes("RFM1");
    w.u32(static_cast<std::uint32_t>(map.height()));
    w.u32(static_cast<std::uint32_t>(map.width()));
    w.u32(static_cast<std::uint32_t>(map.channels()));
    for (float v : map.values()) w.f32(v);
    return w.buffer();
}

inline FeatureMap decode_rfm1(ByteReader r) {
    r.expect_magic("RFM1");
    const std::size_t h = r.u32("height"), w = r.u32("width"), c = r.u32("channels");
    if (r.remaining() != h * w * c * 4) throw LoadError(r.source() + ": RFM1 payload size mismatch");
    std::vector<float> v(h * w * c);
    for (float& x : v) x = r.f32("value");
    return FeatureMap(h, w, c, std::move(v));
}

inline std::vector<char> encode_rim1(const IndexMap& map) {
    if (map.channels() != 1) throw ContractViolation("index map must have one channel");
    ByteWriter w;
    w.bytes("RIM1");
    w.u32(static_cast<std::uint32_t>(map.height()));
    w.u32(static_cast<std::uint32_t>(map.width()));
    for (std::uint32_t v : map.values()) w.u32(v);
    return w.buffer();
}

inline IndexMap decode_rim1(ByteReader r) {
    r.expect_magic("RIM1");
    const std::size_t h = r.u32("height"), w = r.u32("width");
    if (r.remaining() != h * w * 4) throw LoadError(r.source() + ": RIM1 payload size mismatch");
    std::vector<std::uint32_t> v(h * w);
    for (auto& x : v) x = r.u32("index");
    return IndexMap(h, w, 1, std::move(v));
}

namespace detail {
inline void write_all(const std::filesystem::path& path, const std::vector<char>& bytes) {
    ByteWriter w;
    w.bytes(std::string_view(bytes.data(), bytes.size()));
    w.save(path);
}
}  // namespace detail

inline void save_rfm1(const std::filesystem::path& path, const FeatureMap& map) {
    detail::write_all(path, encode_rfm1(map));
}
inline FeatureMap load_rfm1(const std::filesystem::path& path) { return decode_rfm1(ByteReader::from_file(path)); }

inline void save_rim1(const std::filesystem::path& path, const IndexMap& map) {
    detail::write_all(path, encode_rim1(map));
}
inline IndexMap load_rim1(const std::filesystem::path& path) { return decode_rim1(ByteReader::from_file(path)); }

}  // namespace refdeblur::io
