#pragma once

// RWB1 weight bundle:
//   "RWB1", u32 tensor count, then per tensor
//   u16 name length, name bytes, u8 rank, rank x u32 dims, prod(dims) x f32.
// Little-endian throughout.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "refdeblur/io/binary.hpp"

namespace refdeblur {

struct WeightTensor {
    std::vector<std::uint32_t> shape;
    std::vector<float> values;

    [[nodiscard]] std::size_t numel() const {
        return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    }

    friend bool operator==(const WeightTensor&, const WeightTensor&) = default;
};

/// Named tensors for every learned consumer (fusion, reference encoder, backbone, phi).
/// Names are unique and every value is finite.
class WeightBundle {
public:
    void insert(const std::string& name, WeightTensor t) {
        if (name.empty() || name.size() > 0xffff) throw WeightError("invalid tensor name length");
        if (t.shape.size() > 0xff) throw WeightError("tensor '" + name + "' has rank > 255");
        if (t.values.size() != t.numel()) {
            throw WeightError("tensor '" + name + "' value count does not match its shape");
        }
        for (float v : t.values)
            if (!std::isfinite(v)) throw WeightError("tensor '" + name + "' contains a non-finite value");
        if (!tensors_.emplace(name, std::move(t)).second) {
            throw WeightError("duplicate tensor name '" + name + "'");
        }
    }

    void insert_or_assign(const std::string& name, WeightTensor t) {
        tensors_.erase(name);
        insert(name, std::move(t));
    }

    [[nodiscard]] bool contains(const std::string& name) const { return tensors_.contains(name); }

    [[nodiscard]] const WeightTensor* find(const std::string& name) const {
        auto it = tensors_.find(name);
        return it == tensors_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] const WeightTensor& at(const std::string& name) const {
        if (const auto* t = find(name)) return *t;
        throw WeightError("missing weight tensor '" + name + "'");
    }

    [[nodiscard]] std::size_t size() const noexcept { return tensors_.size(); }
    [[nodiscard]] const std::map<std::string, WeightTensor>& tensors() const noexcept { return tensors_; }

    friend bool operator==(const WeightBundle&, const WeightBundle&) = default;

    [[nodiscard]] std::vector<char> encode() const {
        io::ByteWriter w;
        w.bytes("RWB1");
        w.u32(static_cast<std::uint32_t>(tensors_.size()));
        for (const auto& [name, t] : tensors_) {
            w.u16(static_cast<std::uint16_t>(name.size()));
            w.bytes(name);
            w.u8(static_cast<std::uint8_t>(t.shape.size()));
            for (auto d : t.shape) w.u32(d);
            for (float v : t.values) w.f32(v);
        }
        return w.buffer();
    }

    static WeightBundle decode(io::ByteReader r) {
        r.expect_magic("RWB1");
        const std::uint32_t count = r.u32("tensor count");
        WeightBundle b;
        for (std::uint32_t n = 0; n < count; ++n) {
            const std::uint16_t len = r.u16("name length");
            const std::string name = r.bytes(len, "tensor name");
            WeightTensor t;
            const std::uint8_t rank = r.u8("rank of '" + name + "'");
            for (std::uint8_t i = 0; i < rank; ++i) t.shape.push_back(r.u32("dims of '" + name + "'"));
            const std::size_t numel = t.numel();
            if (r.remaining() / 4 < numel) {
                throw LoadError(r.source() + ": truncated while reading values of '" + name + "'");
            }
            t.values.resize(numel);
            for (float& v : t.values) {
                v = r.f32(name);
                if (!std::isfinite(v)) {
                    throw LoadError(r.source() + ": tensor '" + name + "' contains a non-finite value");
                }
            }
            if (b.contains(name)) throw LoadError(r.source() + ": duplicate tensor name '" + name + "'");
            b.insert(name, std::move(t));
        }
        if (!r.at_end()) throw LoadError(r.source() + ": trailing bytes after last tensor");
        return b;
    }

    void save(const std::filesystem::path& path) const {
        io::ByteWriter w;
        const auto bytes = encode();
        w.bytes(std::string_view(bytes.data(), bytes.size()));
        w.save(path);
    }

private:
    std::map<std::string, WeightTensor> tensors_;
};

inline WeightBundle load_weights(const std::filesystem::path& path) {
    return WeightBundle::decode(io::ByteReader::from_file(path));
}

}  // namespace refdeblur
