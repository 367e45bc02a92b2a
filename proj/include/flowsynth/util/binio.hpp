#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowsynth/util/sha256.hpp"

namespace flowsynth {

// Little-endian binary writers/readers for the container formats. The files
// are specified little-endian; these helpers keep the byte layout explicit
// instead of relying on host endianness.

class BinWriter {
public:
    void u16(std::uint16_t v) { bytes(&v, 2, 2); }
    void u32(std::uint32_t v) { bytes(&v, 4, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8, 8); }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }

    const std::vector<unsigned char>& data() const { return buf_; }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open for writing: " + path);
        f.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
        if (!f) throw std::runtime_error("write failed: " + path);
    }

private:
    void bytes(const void* p, std::size_t n, std::size_t) {
        // serialize value little-endian byte by byte
        std::uint64_t v = 0;
        std::memcpy(&v, p, n);
        for (std::size_t i = 0; i < n; ++i) buf_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }

    std::vector<unsigned char> buf_;
};

class BinReader {
public:
    explicit BinReader(std::vector<unsigned char> data) : buf_(std::move(data)) {}

    static BinReader from_file(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open: " + path);
        std::vector<unsigned char> data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        return BinReader(std::move(data));
    }

    std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str() {
        std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void raw(void* p, std::size_t n) {
        need(n);
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    bool at_end() const { return pos_ == buf_.size(); }
    std::size_t remaining() const { return buf_.size() - pos_; }

private:
    std::uint64_t le(std::size_t n) {
        need(n);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < n; ++i) v |= std::uint64_t(buf_[pos_ + i]) << (8 * i);
        pos_ += n;
        return v;
    }
    void need(std::size_t n) const {
        if (pos_ + n > buf_.size()) throw std::runtime_error("container truncated");
    }

    std::vector<unsigned char> buf_;
    std::size_t pos_ = 0;
};

std::string inline read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << text;
    if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::string sha256_file_hex(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    Sha256 h;
    char chunk[65536];
    while (f.read(chunk, sizeof(chunk)) || f.gcount() > 0) {
        h.update(chunk, static_cast<std::size_t>(f.gcount()));
        if (!f) break;
    }
    auto d = h.finish();
    static const char* k = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (unsigned char b : d) {
        out.push_back(k[b >> 4]);
        out.push_back(k[b & 0xf]);
    }
    return out;
}

}  // namespace flowsynth
