#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gaensim {

using Bytes = std::vector<uint8_t>;
template <size_t N>
using ByteArray = std::array<uint8_t, N>;

std::string to_hex(std::span<const uint8_t> data);
Bytes from_hex(std::string_view hex);

/// Colon-separated hex, e.g. "13:ac:57:35:3c:ea".
std::string format_mac(const ByteArray<6>& address);
ByteArray<6> parse_mac(std::string_view text);

/// FNV-1a over raw bytes, for using byte arrays as hash-map keys.
struct ByteArrayHash {
    template <size_t N>
    size_t operator()(const ByteArray<N>& a) const noexcept {
        uint64_t h = 1469598103934665603ull;
        for (uint8_t b : a) {
            h ^= b;
            h *= 1099511628211ull;
        }
        return static_cast<size_t>(h);
    }
};

// Little-endian writers/readers for binary file formats.
void append_u16(Bytes& out, uint16_t v);
void append_u32(Bytes& out, uint32_t v);
void append_u64(Bytes& out, uint64_t v);
void append_i32(Bytes& out, int32_t v);

class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

    uint8_t u8();
    uint16_t u16();
    uint32_t u32();
    uint64_t u64();
    int32_t i32();
    Bytes take(size_t n);
    size_t remaining() const { return data_.size() - pos_; }

private:
    void need(size_t n) const;
    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

}  // namespace gaensim
