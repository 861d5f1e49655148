#pragma once

// Little-endian byte buffers for the project's binary file formats.

#include "gaitformer/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace gaitformer::io {

// Truncated or malformed binary payload.
class FormatError : public Error {
public:
    using Error::Error;
};

class ByteWriter {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) { put_le(v); }
    void u64(std::uint64_t v) { put_le(v); }
    void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }

    const std::vector<unsigned char>& buffer() const { return buf_; }

    void write_file(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + path.string());
        }
        out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
        if (!out) {
            throw Error("write failed for " + path.string());
        }
    }

private:
    template <typename T>
    void put_le(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
        }
    }

    std::vector<unsigned char> buf_;
};

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class ByteReader {
public:
    ByteReader(std::vector<unsigned char> data, std::string source)
        : data_(std::move(data)), source_(std::move(source)) {}

    void require(std::uint64_t n) const {
        if (n > data_.size() - pos_) {
            throw FormatError(source_ + ": truncated at byte " + std::to_string(pos_));
        }
    }
    void bytes(void* out, std::size_t n) {
        require(n);
        std::memcpy(out, data_.data() + pos_, n);
        pos_ += n;
    }
    std::uint8_t u8() {
        require(1);
        return data_[pos_++];
    }
    std::uint32_t u32() { return get_le<std::uint32_t>(); }
    std::uint64_t u64() { return get_le<std::uint64_t>(); }
    double f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }
    std::string str() {
        const std::uint32_t n = u32();
        require(n);
        std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return data_.size() - pos_; }
    const std::vector<unsigned char>& data() const { return data_; }

    void expect_end() const {
        if (pos_ != data_.size()) {
            throw FormatError(source_ + ": " + std::to_string(data_.size() - pos_) +
                              " unexpected trailing bytes");
        }
    }

private:
    template <typename T>
    T get_le() {
        require(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<T>(data_[pos_ + i]) << (8 * i);
        }
        pos_ += sizeof(T);
        return v;
    }

    std::vector<unsigned char> data_;
    std::size_t pos_ = 0;
    std::string source_;
};

} // namespace gaitformer::io
