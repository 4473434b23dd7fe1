#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gt/error.hpp"

namespace gt {

/// Little-endian byte sink independent of host byte order.
class ByteWriter {
public:
    void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }

    void u32(std::uint32_t v) {
        for (int k = 0; k < 4; ++k) {
            buf_.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
        }
    }

    void u64(std::uint64_t v) {
        for (int k = 0; k < 8; ++k) {
            buf_.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
        }
    }

    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

    void f32s(std::span<const float> vs) {
        for (float v : vs) {
            f32(v);
        }
    }

    const std::string& data() const { return buf_; }

private:
    std::string buf_;
};

/// Bounds-checked little-endian reader; truncation raises ArtifactError.
class ByteReader {
public:
    ByteReader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

    std::string_view bytes(std::size_t n) {
        need(n);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * k);
        }
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int k = 0; k < 8; ++k) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * k);
        }
        return v;
    }

    float f32() { return std::bit_cast<float>(u32()); }

    std::vector<float> f32s(std::size_t n) {
        need(n * 4);
        std::vector<float> out(n);
        for (auto& v : out) {
            v = f32();
        }
        return out;
    }

    bool at_end() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) {
            throw ArtifactError(what_ + ": truncated file");
        }
    }

    std::string_view data_;
    std::string what_;
    std::size_t pos_ = 0;
};

/// FNV-1a over raw bytes.
std::uint64_t content_hash(std::string_view bytes) noexcept;

std::string hex64(std::uint64_t v);

std::string read_file(const std::string& path);

/// Writes to `path.tmp-<pid>` then renames over `path`, so readers never see a
/// partially written artifact at the final location.
void write_file_atomic(const std::string& path, std::string_view contents);

} // namespace gt
