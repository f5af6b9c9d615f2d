#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sienna {

// Ordered bit sequence, one bit per element (0 or 1). Byte packing is
// big-endian, most significant bit first, final byte zero-padded.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::size_t n, std::uint8_t fill = 0) : bits_(n, fill ? 1 : 0) {}
    explicit BitString(std::vector<std::uint8_t> bits);

    static BitString from_bytes(std::span<const std::uint8_t> bytes, std::size_t n_bits);
    static BitString from_bytes(std::span<const std::uint8_t> bytes)
    {
        return from_bytes(bytes, bytes.size() * 8);
    }
    // "0110..." ; any other character is rejected.
    static BitString from_string(const std::string& s);

    std::vector<std::uint8_t> to_bytes() const;
    std::string to_string() const;

    std::size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }
    std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
    void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }
    void flip(std::size_t i) { bits_[i] ^= 1; }
    void push_back(bool v) { bits_.push_back(v ? 1 : 0); }
    void append(const BitString& other);

    BitString slice(std::size_t pos, std::size_t len) const;
    std::size_t popcount() const;

    // Bitwise XOR; lengths must match.
    BitString& operator^=(const BitString& other);
    friend BitString operator^(BitString a, const BitString& b) { return a ^= b; }
    friend bool operator==(const BitString&, const BitString&) = default;

    const std::vector<std::uint8_t>& raw() const { return bits_; }

private:
    std::vector<std::uint8_t> bits_;
};

std::size_t hamming_distance(const BitString& a, const BitString& b);

// Packs symbols of width k_bits MSB-first; inverse of bits_to_symbols.
BitString symbols_to_bits(std::span<const std::uint16_t> symbols, unsigned k_bits);
std::vector<std::uint16_t> bits_to_symbols(const BitString& bits, unsigned k_bits);

std::string to_hex(std::span<const std::uint8_t> bytes);

} // namespace sienna
