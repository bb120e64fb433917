#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refdeblur/errors.hpp"

namespace refdeblur::io {

/// Append-only little-endian byte sink.
class ByteWriter {
public:
    void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

    [[nodiscard]] const std::vector<char>& buffer() const noexcept { return buf_; }

    void save(const std::filesystem::path& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw LoadError("cannot open " + path.string() + " for writing");
        os.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        if (!os) throw LoadError("failed writing " + path.string());
    }

private:
    void put(std::uint32_t v, int n) {
        for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    std::vector<char> buf_;
};

/// Bounds-checked little-endian reader; every overrun is a LoadError.
class ByteReader {
public:
    explicit ByteReader(std::vector<char> data, std::string source = "buffer")
        : data_(std::move(data)), source_(std::move(source)) {}

    static ByteReader from_file(const std::filesystem::path& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw LoadError("cannot open " + path.string());
        std::vector<char> data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
        return ByteReader(std::move(data), path.string());
    }

    std::string bytes(std::size_t n, std::string_view what) {
        need(n, what);
        std::string s(data_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    std::uint8_t u8(std::string_view what) { return static_cast<std::uint8_t>(get(1, what)); }
    std::uint16_t u16(std::string_view what) { return static_cast<std::uint16_t>(get(2, what)); }
    std::uint32_t u32(std::string_view what) { return get(4, what); }
    float f32(std::string_view what) { return std::bit_cast<float>(get(4, what)); }

    void expect_magic(std::string_view magic) {
        if (bytes(magic.size(), "magic") != magic) {
            throw LoadError(source_ + ": bad magic, expected " + std::string(magic));
        }
    }

    [[nodiscard]] bool at_end() const noexcept { return pos_ == data_.size(); }
    [[nodiscard]] std::size_t remaining() const noexcept { return data_.size() - pos_; }
    [[nodiscard]] const std::string& source() const noexcept { return source_; }

private:
    void need(std::size_t n, std::string_view what) const {
        if (data_.size() - pos_ < n) {
            throw LoadError(source_ + ": truncated while reading " + std::string(what));
        }
    }
    std::uint32_t get(int n, std::string_view what) {
        need(static_cast<std::size_t>(n), what);
        std::uint32_t v = 0;
        for (int i = 0; i < n; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::vector<char> data_;
    std::string source_;
    std::size_t pos_ = 0;
};

}  // namespace refdeblur::io
